#ifndef QEDOEP__ORACLE__SUM_OVER_STATES
#define QEDOEP__ORACLE__SUM_OVER_STATES

#include <qedoep/eigensolver/eigensolver.hpp>
#include <qedoep/hamiltonian/photon_mode.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qedoep {

// Reference quantities built from a complete (dense) spectrum of h_s. One
// spin channel with `nocc` singly occupied orbitals; functional derivatives
// are taken per unit volume.
class sum_over_states {

	grid mesh_;
	int nocc_;
	photon_mode mode_;
	Eigen::MatrixXd phi_;      // columns are orbitals, grid-normalized
	Eigen::VectorXd eps_;
	Eigen::MatrixXd d_;        // d_jk over the full spectrum

public:

	sum_over_states(eigen_result const & spectrum, int nocc, photon_mode const & mode):
		mesh_(spectrum.orbitals.at(0).mesh()), nocc_(nocc), mode_(mode) {
		auto n = Eigen::Index(spectrum.orbitals.size());
		if(nocc < 1 || nocc >= n) throw std::invalid_argument("sum_over_states: occupied count out of range");
		if(std::size_t(n) != mesh_.size()) throw std::invalid_argument("sum_over_states: spectrum must be complete");
		phi_.resize(Eigen::Index(mesh_.size()), n);
		eps_.resize(n);
		for(Eigen::Index j = 0; j < n; j++) {
			eps_[j] = spectrum.energies[std::size_t(j)];
			for(Eigen::Index ip = 0; ip < phi_.rows(); ip++) phi_(ip, j) = spectrum.orbitals[std::size_t(j)][std::size_t(ip)];
		}
		Eigen::VectorXd dfield(phi_.rows());
		for(Eigen::Index ip = 0; ip < phi_.rows(); ip++) dfield[ip] = mode.project(mesh_.point(std::size_t(ip)));
		d_ = phi_.transpose()*dfield.asDiagonal()*phi_*mesh_.cell_volume();
	}

	Eigen::Index states() const { return eps_.size(); }
	Eigen::MatrixXd const & dipole() const { return d_; }

	field orbital(Eigen::Index j) const {
		field f(mesh_);
		for(std::size_t ip = 0; ip < mesh_.size(); ip++) f[ip] = phi_(Eigen::Index(ip), j);
		return f;
	}

	// Phi1_i = -sqrt(w/2) sum_{a unocc} phi_a d_ai/(e_a - e_i + w)
	field phi1(int i) const {
		field f(mesh_);
		double g = std::sqrt(0.5*mode_.omega);
		for(Eigen::Index a = nocc_; a < states(); a++) {
			double coef = -g*d_(a, i)/(eps_[a] - eps_[i] + mode_.omega);
			for(std::size_t ip = 0; ip < mesh_.size(); ip++) f[ip] += coef*phi_(Eigen::Index(ip), a);
		}
		return f;
	}

	// Phi2_i = sum_{a unocc} phi_a d_ai
	field phi2(int i) const {
		field f(mesh_);
		for(Eigen::Index a = nocc_; a < states(); a++) {
			for(std::size_t ip = 0; ip < mesh_.size(); ip++) f[ip] += d_(a, i)*phi_(Eigen::Index(ip), a);
		}
		return f;
	}

	// E_x = 1/2 sum_{i occ, a unocc} d_ai^2 (e_a - e_i)/(e_a - e_i + w)
	double exchange_energy() const {
		double e = 0.0;
		for(int i = 0; i < nocc_; i++) {
			for(Eigen::Index a = nocc_; a < states(); a++) {
				double gap = eps_[a] - eps_[i];
				e += 0.5*d_(a, i)*d_(a, i)*gap/(gap + mode_.omega);
			}
		}
		return e;
	}

	// chi(r, r') = 2 sum_{i occ} sum_{m unocc} phi_i(r) phi_m(r) phi_m(r') phi_i(r')/(e_i - e_m)
	Eigen::MatrixXd response() const {
		auto np = phi_.rows();
		Eigen::MatrixXd chi = Eigen::MatrixXd::Zero(np, np);
		for(int i = 0; i < nocc_; i++) {
			for(Eigen::Index m = nocc_; m < states(); m++) {
				Eigen::VectorXd pair = phi_.col(i).cwiseProduct(phi_.col(m));
				chi += (2.0/(eps_[i] - eps_[m]))*pair*pair.transpose();
			}
		}
		return chi;
	}

	// delta phi_j(r')/delta v(r) contracted with a perturbation dv:
	// sum_{m != j} phi_m <phi_m|dv|phi_j>/(e_j - e_m)
	field orbital_response(int j, field const & dv) const {
		field f(mesh_);
		for(Eigen::Index m = 0; m < states(); m++) {
			if(m == j) continue;
			double coupling = 0.0;
			for(std::size_t ip = 0; ip < mesh_.size(); ip++) coupling += phi_(Eigen::Index(ip), m)*dv[ip]*phi_(Eigen::Index(ip), j);
			coupling *= mesh_.cell_volume();
			for(std::size_t ip = 0; ip < mesh_.size(); ip++) f[ip] += coupling/(eps_[j] - eps_[m])*phi_(Eigen::Index(ip), m);
		}
		return f;
	}

	// dE_x/dv_s(r) by the chain rule through orbitals and eigenvalues
	field exchange_derivative() const {
		auto n = states();
		auto np = phi_.rows();
		double w = mode_.omega;
		Eigen::VectorXd result = Eigen::VectorXd::Zero(np);

		for(int i = 0; i < nocc_; i++) {
			for(Eigen::Index a = nocc_; a < n; a++) {
				double gap = eps_[a] - eps_[i];
				double g = gap/(gap + w);
				double dg = w/((gap + w)*(gap + w));
				double dai = d_(a, i);
				// eigenvalue dependence
				Eigen::VectorXd contrib = 0.5*dai*dai*dg*(phi_.col(a).cwiseAbs2() - phi_.col(i).cwiseAbs2());
				// orbital dependence of d_ai
				Eigen::VectorXd ddai = Eigen::VectorXd::Zero(np);
				for(Eigen::Index m = 0; m < n; m++) {
					if(m != a) ddai += (d_(m, i)/(eps_[a] - eps_[m]))*phi_.col(m).cwiseProduct(phi_.col(a));
					if(m != i) ddai += (d_(a, m)/(eps_[i] - eps_[m]))*phi_.col(m).cwiseProduct(phi_.col(i));
				}
				contrib += dai*g*ddai;
				result += contrib;
			}
		}
		field f(mesh_);
		for(Eigen::Index ip = 0; ip < np; ip++) f[std::size_t(ip)] = result[ip];
		return f;
	}

	// chain-rule OEP residual for a trial exchange potential: chi v_x - dE_x/dv_s
	field chain_rule_residual(field const & vx) const {
		check_same_grid(mesh_, vx.mesh(), "chain_rule_residual");
		Eigen::Map<Eigen::VectorXd const> v(vx.data(), Eigen::Index(vx.size()));
		Eigen::VectorXd chiv = response()*v*mesh_.cell_volume();
		auto dex = exchange_derivative();
		field f(mesh_);
		for(std::size_t ip = 0; ip < f.size(); ip++) f[ip] = chiv[Eigen::Index(ip)] - dex[ip];
		return f;
	}

};

// dE_x/dv_s(r_p) by central differences of the sum-over-states energy of
// h_s + eta delta_p (delta normalized to unit integral)
template <class HamiltonianFactory>
field finite_difference_exchange_derivative(HamiltonianFactory && make_h, field const & vs, int nocc, photon_mode const & mode, double eta = 1e-5) {
	auto const & mesh = vs.mesh();
	field result(mesh);
	for(std::size_t ip = 0; ip < mesh.size(); ip++) {
		double e[2];
		for(int s = 0; s < 2; s++) {
			auto v = vs;
			v[ip] += (s == 0 ? eta : -eta)/mesh.cell_volume();
			auto h = make_h(v);
			e[s] = sum_over_states(dense_spectrum(h), nocc, mode).exchange_energy();
		}
		result[ip] = (e[0] - e[1])/(2.0*eta);
	}
	return result;
}

}

#endif
