#ifndef QEDOEP__PHOTON_XC__EXCHANGE
#define QEDOEP__PHOTON_XC__EXCHANGE

#include <qedoep/photon_xc/shifts.hpp>
#include <qedoep/realspace/soft_coulomb.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qedoep {

struct xc_breakdown {
	double e_x_electron = 0.0;
	std::vector<double> e_x_photon;
	field v_x;
	double constant_offset = 0.0;

	double e_x_photon_total() const {
		double sum = 0.0;
		for(auto e : e_x_photon) sum += e;
		return sum;
	}
};

// u_xi phi_i = -sum_j phi_j (w * phi_j phi_i), same-spin orbitals only
inline field fock_apply(ks_system const & ks, interaction_kernel const & kernel, std::size_t i) {
	if(i >= ks.occupied()) throw std::out_of_range("fock_apply: orbital index out of range");
	field result(ks.mesh());
	for(auto const & phi_j : ks.orbitals) {
		auto pot = kernel.convolve(phi_j*ks.orbitals[i]);
		result.axpy(-1.0, pot*phi_j);
	}
	return result;
}

// photon exchange contribution of orbital i for mode alpha:
// 2 sqrt(w/8) <Phi1|d|phi> + 1/2 (<d phi|d phi> - sum_k d_ki^2)
inline double orbital_photon_exchange(ks_system const & ks, photon_mode const & mode, shift_set const & shifts, std::size_t i, std::size_t alpha) {
	auto dphi = dipole_apply(mode, ks.orbitals[i]);
	double sum_d2 = 0.0;
	auto const & d = shifts.dipole[alpha];
	for(Eigen::Index k = 0; k < d.rows(); k++) sum_d2 += d(k, Eigen::Index(i))*d(k, Eigen::Index(i));
	return 2.0*std::sqrt(mode.omega/8.0)*inner_product(shifts.phi1[i][alpha], dphi) + 0.5*(inner_product(dphi, dphi) - sum_d2);
}

// one spin channel, `occupancy` spin copies of it (2 in restricted mode)
inline xc_breakdown exchange_energy(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts,
                                    interaction_kernel const * kernel = nullptr, double occupancy = 1.0) {
	check_current(shifts, ks, "exchange_energy");
	xc_breakdown xc;
	xc.v_x = field(ks.mesh());
	for(std::size_t alpha = 0; alpha < modes.size(); alpha++) {
		double e = 0.0;
		if(modes[alpha].coupled()) {
			for(std::size_t i = 0; i < ks.occupied(); i++) e += orbital_photon_exchange(ks, modes[alpha], shifts, i, alpha);
		}
		xc.e_x_photon.push_back(occupancy*e);
	}
	if(kernel) {
		double e = 0.0;
		for(std::size_t i = 0; i < ks.occupied(); i++) e += 0.5*inner_product(ks.orbitals[i], fock_apply(ks, *kernel, i));
		xc.e_x_electron = occupancy*e;
	}
	return xc;
}

// v_x-independent part of the photon orbital shift M_i:
// sum_a d (sqrt(w/2) Phi1_i + d phi_i/2) - sum_k d_ik (sqrt(w/2) Phi1_k + d phi_k)
inline field photon_source(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts, std::size_t i) {
	field result(ks.mesh());
	for(std::size_t alpha = 0; alpha < modes.size(); alpha++) {
		if(!modes[alpha].coupled()) continue;
		double s = std::sqrt(0.5*modes[alpha].omega);
		auto dfield = dipole_field(modes[alpha], ks.mesh());
		auto const & d = shifts.dipole[alpha];

		auto local = shifts.phi1[i][alpha]*s;
		local.axpy(0.5, dfield*ks.orbitals[i]);
		result += dfield*local;
		for(std::size_t k = 0; k < ks.occupied(); k++) {
			auto dik = d(Eigen::Index(i), Eigen::Index(k));
			result.axpy(-dik*s, shifts.phi1[k][alpha]);
			result.axpy(-dik, dfield*ks.orbitals[k]);
		}
	}
	return result;
}

// M_i = -(v_x - u_xi) phi_i + photon_source_i
inline field build_M(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts, field const & vx,
                     std::size_t i, interaction_kernel const * kernel = nullptr) {
	check_current(shifts, ks, "build_M");
	auto result = photon_source(ks, modes, shifts, i);
	result.axpy(-1.0, vx*ks.orbitals[i]);
	if(kernel) result += fock_apply(ks, *kernel, i);
	return result;
}

// Lambda_i = 1/2 sum_a (|Phi1_i|^2 - <Phi1_i|Phi1_i> |phi_i|^2)
inline field build_Lambda(shift_set const & shifts, ks_system const & ks, std::size_t i) {
	check_current(shifts, ks, "build_Lambda");
	field result(ks.mesh());
	auto density = ks.orbitals[i]*ks.orbitals[i];
	for(auto const & p1 : shifts.phi1[i]) {
		result.axpy(0.5, p1*p1);
		result.axpy(-0.5*inner_product(p1, p1), density);
	}
	return result;
}

// S = sum_i psi_i phi_i - Lambda_i + c.c.
inline field residual_S(ks_system const & ks, shift_set const & shifts) {
	check_current(shifts, ks, "residual_S");
	if(shifts.psi.size() != ks.occupied()) throw std::logic_error("residual_S: psi not solved");
	field result(ks.mesh());
	for(std::size_t i = 0; i < ks.occupied(); i++) {
		result.axpy(2.0, shifts.psi[i]*ks.orbitals[i]);
		if(!shifts.Lambda.empty()) result.axpy(-2.0, shifts.Lambda[i]);
	}
	return result;
}

inline field update_vx(field const & vx_old, field const & S, double c) {
	if(!(c > 0.0)) throw std::invalid_argument("update_vx: step must be positive");
	auto result = vx_old;
	result.axpy(c, S);
	return result;
}

// Richardson stepping with the divergence guard: a step whose max|S| exceeds
// ten times the best value seen is rejected and c is halved.
class step_control {

	double c_;
	double best_ = std::numeric_limits<double>::infinity();
	int rejections_ = 0;

public:

	explicit step_control(double c): c_(c) {
		if(!(c > 0.0)) throw std::invalid_argument("step_control: step must be positive");
	}

	double step() const { return c_; }
	double best() const { return best_; }
	int rejections() const { return rejections_; }

	// true if the iterate that produced `residual` is accepted
	bool accept(double residual) {
		if(residual > 10.0*best_ || !std::isfinite(residual)) {
			c_ *= 0.5;
			rejections_++;
			return false;
		}
		best_ = std::min(best_, residual);
		return true;
	}

};

// shifts vx so that <phi_N|vx|phi_N> = target
inline field fix_constant(ks_system const & ks, double target, field const & vx) {
	auto const & phi = ks.orbitals[ks.homo()];
	double shift = target - inner_product(phi, vx, phi);
	auto result = vx;
	for(auto & value : result) value += shift;
	return result;
}

// HOMO's own photon exchange terms
inline double photon_constant_target(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts) {
	check_current(shifts, ks, "photon_constant_target");
	double target = 0.0;
	auto homo = ks.homo();
	for(std::size_t alpha = 0; alpha < modes.size(); alpha++) {
		if(modes[alpha].coupled()) target += orbital_photon_exchange(ks, modes[alpha], shifts, homo, alpha);
	}
	return target;
}

// <phi_N|u_xN|phi_N>
inline double electron_constant_target(ks_system const & ks, interaction_kernel const & kernel) {
	auto homo = ks.homo();
	return inner_product(ks.orbitals[homo], fock_apply(ks, kernel, homo));
}

}

#endif
