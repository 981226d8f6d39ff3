#ifndef QEDOEP__PHOTON_XC__SHIFTS
#define QEDOEP__PHOTON_XC__SHIFTS

#include <qedoep/sternheimer/sternheimer.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qedoep {

// Orbital shifts of one spin channel. Indices are [orbital][mode].
struct shift_set {
	std::vector<std::vector<field>> phi1;
	std::vector<std::vector<field>> phi2;
	std::vector<Eigen::MatrixXd> dipole;   // d_kj = <phi_k|lambda.r|phi_j>, per mode
	std::vector<field> M;
	std::vector<field> Lambda;
	std::vector<field> psi;
	std::uint64_t revision = 0;
	int sternheimer_iterations = 0;
	double worst_residual = 0.0;
	bool resonant = false;
	bool converged = true;
};

inline Eigen::MatrixXd dipole_matrix(ks_system const & ks, photon_mode const & mode) {
	auto nocc = Eigen::Index(ks.occupied());
	Eigen::MatrixXd d(nocc, nocc);
	auto dfield = dipole_field(mode, ks.mesh());
	for(Eigen::Index k = 0; k < nocc; k++) {
		for(Eigen::Index j = 0; j <= k; j++) {
			d(k, j) = inner_product(ks.orbitals[std::size_t(k)], dfield, ks.orbitals[std::size_t(j)]);
			d(j, k) = d(k, j);
		}
	}
	return d;
}

// d phi_i - sum_k d_ki phi_k, orthogonal to every occupied orbital
inline field phi2_build(ks_system const & ks, photon_mode const & mode, std::size_t i) {
	if(i >= ks.occupied()) throw std::out_of_range("phi2_build: orbital index out of range");
	auto result = dipole_apply(mode, ks.orbitals[i]);
	auto d = dipole_matrix(ks, mode);
	for(std::size_t k = 0; k < ks.occupied(); k++) result.axpy(-d(Eigen::Index(k), Eigen::Index(i)), ks.orbitals[k]);
	return result;
}

struct shift_options {
	double tol = 1e-9;
	int max_iter = 0;
};

// Phi1 for every (i, mode) plus Phi2 and the dipole matrices. `previous`
// supplies warm starts when its layout matches.
inline shift_set build_shifts(ks_system const & ks, std::vector<photon_mode> const & modes, shift_options const & opts = {},
                              shift_set const * previous = nullptr) {
	shift_set shifts;
	shifts.revision = ks.revision;
	auto nocc = ks.occupied();
	shifts.phi1.assign(nocc, {});
	shifts.phi2.assign(nocc, {});

	bool warm = previous && previous->phi1.size() == nocc;
	for(std::size_t alpha = 0; alpha < modes.size(); alpha++) {
		shifts.dipole.push_back(dipole_matrix(ks, modes[alpha]));
		auto const & d = shifts.dipole.back();
		auto dfield = dipole_field(modes[alpha], ks.mesh());

		for(std::size_t i = 0; i < nocc; i++) {
			std::optional<field> guess;
			if(warm && previous->phi1[i].size() == modes.size()) guess = previous->phi1[i][alpha];
			auto res = phi1_solve(ks, modes[alpha], i, opts.tol, opts.max_iter, std::move(guess));
			shifts.sternheimer_iterations += res.report.iterations;
			shifts.worst_residual = std::max(shifts.worst_residual, res.report.residual);
			shifts.converged = shifts.converged && res.report.converged;
			shifts.resonant = shifts.resonant || res.resonant;
			shifts.phi1[i].push_back(std::move(res.phi1));

			auto p2 = dfield*ks.orbitals[i];
			for(std::size_t k = 0; k < nocc; k++) p2.axpy(-d(Eigen::Index(k), Eigen::Index(i)), ks.orbitals[k]);
			shifts.phi2[i].push_back(std::move(p2));
		}
	}
	return shifts;
}

inline void check_current(shift_set const & shifts, ks_system const & ks, char const * where) {
	if(shifts.revision != ks.revision) throw std::logic_error(std::string(where) + ": orbital shifts are stale");
	if(shifts.phi1.size() != ks.occupied()) throw std::logic_error(std::string(where) + ": orbital shifts do not match the state");
}

}

#endif
