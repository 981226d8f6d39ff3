#ifndef QEDOEP__ORACLE__EXACT_DIAG
#define QEDOEP__ORACLE__EXACT_DIAG

#include <qedoep/eigensolver/eigensolver.hpp>
#include <qedoep/hamiltonian/external_potential.hpp>
#include <qedoep/hamiltonian/photon_mode.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qedoep {

// One electron coupled to one photon mode. Product basis with the photon
// number outermost: index = m*grid_points + ip.
//   H = (T + v + (lambda.r)^2/2) x 1 + w a^dagger a - sqrt(w/2) (lambda.r) x (a + a^dagger)
class coupled_hamiltonian {

	ks_hamiltonian electronic_;
	photon_mode mode_;
	field dipole_;

public:

	coupled_hamiltonian(field const & vext, unit_system const & units, photon_mode const & mode, int order = 4):
		electronic_(vext + 0.5*(dipole_field(mode, vext.mesh())*dipole_field(mode, vext.mesh())), units, order),
		mode_(mode), dipole_(dipole_field(mode, vext.mesh())) {
		mode_.validate(vext.mesh().ndim());
	}

	grid const & mesh() const { return electronic_.mesh(); }
	photon_mode const & mode() const { return mode_; }
	ks_hamiltonian const & electronic() const { return electronic_; }
	std::size_t grid_points() const { return mesh().size(); }
	std::size_t dimension() const { return grid_points()*std::size_t(mode_.fock_cutoff); }

	void apply(std::span<double const> in, std::span<double> out) const {
		auto n = grid_points();
		auto nf = std::size_t(mode_.fock_cutoff);
		double g = std::sqrt(0.5*mode_.omega);
		for(std::size_t m = 0; m < nf; m++) {
			auto in_m = in.subspan(m*n, n);
			auto out_m = out.subspan(m*n, n);
			electronic_.apply(in_m, out_m);
			double wm = mode_.omega*double(m);
			double up = std::sqrt(double(m + 1));
			double down = std::sqrt(double(m));
			for(std::size_t ip = 0; ip < n; ip++) {
				double coupled = 0.0;
				if(m > 0) coupled += down*in[(m - 1)*n + ip];
				if(m + 1 < nf) coupled += up*in[(m + 1)*n + ip];
				out_m[ip] += wm*in_m[ip] - g*dipole_[ip]*coupled;
			}
		}
	}

};

struct exact_options {
	double tol = 1e-8;
	int max_iter = 3000;
	std::uint64_t seed = 1;
	double precond_shift = 0.0;
	// split by the combined parity r -> -r, a -> -a when the potential is even
	bool use_parity = true;
	// compare with cutoff + 5 and report the energy shift
	bool check_cutoff = false;
	double cutoff_tol = 1e-6;
};

struct exact_state {
	double energy = 0.0;
	Eigen::VectorXd vector;   // normalized with the grid measure
	grid mesh;
	photon_mode mode;
	int iterations = 0;
	bool converged = false;
	double residual = 0.0;
	int parity = 0;           // +1, -1, or 0 when not used
	double top_weight = 0.0;  // weight in the highest Fock state
	std::optional<double> cutoff_shift;
	bool cutoff_converged = true;

	std::span<double const> block(int m) const {
		auto n = mesh.size();
		return std::span<double const>(vector.data() + std::size_t(m)*n, n);
	}
};

namespace detail {

inline bool potential_is_even(field const & v) {
	auto const & mesh = v.mesh();
	double scale = std::max(max_abs(v), 1.0);
	for(std::size_t ip = 0; ip < mesh.size(); ip++) {
		if(std::abs(v[ip] - v[mesh.mirror(ip)]) > 1e-12*scale) return false;
	}
	return true;
}

inline exact_state exact_diag_once(field const & vext, unit_system const & units, photon_mode const & mode, int order, exact_options const & opts) {
	coupled_hamiltonian hc(vext, units, mode, order);
	auto const & mesh = hc.mesh();
	auto n = mesh.size();
	auto nf = std::size_t(mode.fock_cutoff);

	double shift = opts.precond_shift > 0.0 ? opts.precond_shift : default_precond_shift(mesh, units.kinetic_coeff);
	kinetic_preconditioner precond(mesh, order, units.kinetic_coeff, shift);

	lobpcg_options lo;
	lo.nev = 1;
	lo.guard = 2;
	lo.tol = opts.tol;
	lo.max_iter = opts.max_iter;
	lo.seed = opts.seed;
	lo.preconditioner = [&](Eigen::MatrixXd & block) {
		std::vector<double> tmp(n);
		for(Eigen::Index j = 0; j < block.cols(); j++) {
			for(std::size_t m = 0; m < nf; m++) {
				std::span<double> part(block.col(j).data() + m*n, n);
				precond.apply_shifted(part, tmp, mode.omega*double(m));
				std::copy(tmp.begin(), tmp.end(), part.begin());
			}
		}
	};

	auto op = [&hc](Eigen::MatrixXd const & in, Eigen::MatrixXd & out) {
		out.resize(in.rows(), in.cols());
		for(Eigen::Index j = 0; j < in.cols(); j++) {
			hc.apply(std::span<double const>(in.col(j).data(), std::size_t(in.rows())), std::span<double>(out.col(j).data(), std::size_t(in.rows())));
		}
	};

	// start from the uncoupled electronic ground state in the vacuum
	auto bare = lowest_states(hc.electronic(), 1, eigensolver_options{1e-6, 2000, 2, opts.seed, shift, {}, {}});
	Eigen::MatrixXd start = Eigen::MatrixXd::Zero(Eigen::Index(hc.dimension()), 1);
	for(std::size_t ip = 0; ip < n; ip++) start(Eigen::Index(ip), 0) = bare.orbitals[0][ip];

	std::vector<int> sectors{0};
	if(opts.use_parity && mode.coupled() && potential_is_even(vext)) sectors = {+1, -1};

	exact_state best{INFINITY, {}, mesh, mode, 0, false, 0.0, 0, 0.0, std::nullopt, true};
	for(auto sector : sectors) {
		auto run = lo;
		run.initial = start;
		if(sector != 0) {
			run.projector = [&mesh, n, nf, sector](Eigen::MatrixXd & block) {
				for(Eigen::Index j = 0; j < block.cols(); j++) {
					auto col = block.col(j);
					for(std::size_t m = 0; m < nf; m++) {
						double sign = (m%2 == 0 ? 1.0 : -1.0)*double(sector);
						for(std::size_t ip = 0; ip < n; ip++) {
							auto jp = mesh.mirror(ip);
							if(jp < ip) continue;
							auto a = col(Eigen::Index(m*n + ip)), b = col(Eigen::Index(m*n + jp));
							col(Eigen::Index(m*n + ip)) = 0.5*(a + sign*b);
							col(Eigen::Index(m*n + jp)) = 0.5*(b + sign*a);
						}
					}
				}
			};
			// odd sector: seed with the one-photon component
			if(sector == -1) {
				run.initial = Eigen::MatrixXd::Zero(start.rows(), 1);
				for(std::size_t ip = 0; ip < n; ip++) run.initial(Eigen::Index(n + ip), 0) = bare.orbitals[0][ip];
			}
		}
		auto raw = lobpcg(op, Eigen::Index(hc.dimension()), run);
		if(raw.values[0] < best.energy) {
			best.energy = raw.values[0];
			best.vector = raw.vectors.col(0)/std::sqrt(mesh.cell_volume());
			best.iterations = raw.iterations;
			best.converged = raw.converged;
			best.residual = raw.residuals[0];
			best.parity = sector;
		}
	}

	double top = 0.0;
	for(std::size_t ip = 0; ip < n; ip++) top += best.vector[Eigen::Index((nf - 1)*n + ip)]*best.vector[Eigen::Index((nf - 1)*n + ip)];
	best.top_weight = top*mesh.cell_volume();
	return best;
}

}

inline exact_state exact_diag(field const & vext, unit_system const & units, photon_mode const & mode, int order = 4, exact_options const & opts = {}) {
	auto st = detail::exact_diag_once(vext, units, mode, order, opts);
	if(opts.check_cutoff) {
		auto larger = mode;
		larger.fock_cutoff += 5;
		auto check = detail::exact_diag_once(vext, units, larger, order, opts);
		st.cutoff_shift = std::abs(check.energy - st.energy);
		st.cutoff_converged = *st.cutoff_shift <= opts.cutoff_tol*std::max(1.0, std::abs(st.energy));
	}
	return st;
}

inline exact_state exact_diag(external_potential const & pot, grid const & mesh, unit_system const & units, photon_mode const & mode,
                              int order = 4, exact_options const & opts = {}) {
	return exact_diag(build_vext(pot, mesh), units, mode, order, opts);
}

struct exact_observables_record {
	double energy = 0.0;
	field density;
	double n_pt = 0.0;
	double double_occupancy = 0.0;   // <a^dagger a^dagger a a>
	field A;                         // <n(r) (a + a^dagger)>
	std::array<double, 2> dipole{0.0, 0.0};
	std::vector<double> fock_weights;
};

inline exact_observables_record exact_observables(exact_state const & st) {
	auto const & mesh = st.mesh;
	auto n = mesh.size();
	auto nf = std::size_t(st.mode.fock_cutoff);
	exact_observables_record rec;
	rec.energy = st.energy;
	rec.density = field(mesh);
	rec.A = field(mesh);
	double dv = mesh.cell_volume();

	for(std::size_t m = 0; m < nf; m++) {
		auto psi = st.block(int(m));
		double weight = 0.0;
		for(std::size_t ip = 0; ip < n; ip++) {
			weight += psi[ip]*psi[ip];
			rec.density[ip] += psi[ip]*psi[ip];
		}
		weight *= dv;
		rec.fock_weights.push_back(weight);
		rec.n_pt += double(m)*weight;
		rec.double_occupancy += double(m)*double(m > 0 ? m - 1 : 0)*weight;
		if(m + 1 < nf) {
			auto next = st.block(int(m + 1));
			double up = 2.0*std::sqrt(double(m + 1));
			for(std::size_t ip = 0; ip < n; ip++) rec.A[ip] += up*psi[ip]*next[ip];
		}
	}
	for(std::size_t ip = 0; ip < n; ip++) {
		auto r = mesh.point(ip);
		rec.dipole[0] += r[0]*rec.density[ip]*dv;
		rec.dipole[1] += r[1]*rec.density[ip]*dv;
	}
	return rec;
}

}

#endif
