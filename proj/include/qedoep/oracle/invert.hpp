#ifndef QEDOEP__ORACLE__INVERT
#define QEDOEP__ORACLE__INVERT

#include <qedoep/eigensolver/eigensolver.hpp>
#include <qedoep/realspace/soft_coulomb.hpp>

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qedoep {

struct inversion_options {
	double tol = 1e-8;           // on int |n_s - n_target|
	int max_iter = 2000;
	double beta = 0.0;           // 0 selects half the initial KS gap
	double eig_tol = 1e-10;
	std::uint64_t seed = 1;
};

struct inversion_result {
	field v_s;
	field v_xc;
	double residual = 0.0;
	int iterations = 0;
	bool converged = false;
};

// Finds v_s whose ground density (pairs doubly occupied when `pairs` > 0,
// otherwise one orbital) reproduces n_target by
//   v <- v + beta (n_s - n_target)/(n_target + eps),  eps = 1e-10 max n
// with beta grown after improving steps and halved after failing ones.
// v_xc = v_s - v_ext - v_H; the constant is left as found.
inline inversion_result invert_vxc(field const & n_target, field const & vext, unit_system const & units, int order = 4, int pairs = 0,
                                   interaction_kernel const * kernel = nullptr, inversion_options const & opts = {}) {
	check_same_grid(n_target.mesh(), vext.mesh(), "invert_vxc");
	auto const & mesh = n_target.mesh();
	for(auto value : n_target) {
		if(!std::isfinite(value) || value < 0.0) throw std::invalid_argument("invert_vxc: target density must be finite and nonnegative");
	}
	int nocc = pairs > 0 ? pairs : 1;
	double occupancy = pairs > 0 ? 2.0 : 1.0;
	double eps = 1e-10*max_abs(n_target);

	auto density_of = [&](field const & v, std::vector<field> const & warm, eigen_result & eig) {
		eigensolver_options eo;
		eo.tol = opts.eig_tol;
		eo.seed = opts.seed;
		eo.initial = warm;
		eig = lowest_states(ks_hamiltonian(v, units, order), nocc + 1, eo);
		field n(mesh);
		for(int i = 0; i < nocc; i++) n.axpy(occupancy, eig.orbitals[std::size_t(i)]*eig.orbitals[std::size_t(i)]);
		return n;
	};

	inversion_result result;
	field v = vext;
	if(kernel) v += hartree_potential(*kernel, n_target);
	eigen_result eig;
	auto n = density_of(v, {}, eig);
	double residual = integral_abs(n - n_target);
	double beta = opts.beta > 0.0 ? opts.beta : 0.5*(eig.energies[std::size_t(nocc)] - eig.energies[std::size_t(nocc - 1)]);
	std::vector<field> warm(eig.orbitals.begin(), eig.orbitals.end());

	while(residual > opts.tol && result.iterations < opts.max_iter) {
		result.iterations++;
		field trial = v;
		for(std::size_t ip = 0; ip < mesh.size(); ip++) trial[ip] += beta*(n[ip] - n_target[ip])/(n_target[ip] + eps);
		eigen_result trial_eig;
		auto n_trial = density_of(trial, warm, trial_eig);
		double trial_residual = integral_abs(n_trial - n_target);
		if(trial_residual < residual) {
			v = std::move(trial);
			n = std::move(n_trial);
			residual = trial_residual;
			warm.assign(trial_eig.orbitals.begin(), trial_eig.orbitals.end());
			beta *= 1.2;
		} else {
			beta *= 0.5;
			if(beta < 1e-14) break;
		}
	}

	result.v_s = v;
	result.residual = residual;
	result.converged = residual <= opts.tol;
	result.v_xc = v - vext;
	if(kernel) result.v_xc -= hartree_potential(*kernel, n_target);
	return result;
}

// single orbital: v_s = e + kinetic_coeff lap(sqrt n)/sqrt n, exact for the
// discrete operator; e fixes the constant
inline field single_orbital_potential(field const & n_target, unit_system const & units, int order = 4, double e = 0.0) {
	field root(n_target.mesh());
	for(std::size_t ip = 0; ip < root.size(); ip++) root[ip] = std::sqrt(std::max(n_target[ip], 0.0));
	auto lap = laplacian_apply(root, order);
	field v(n_target.mesh());
	for(std::size_t ip = 0; ip < v.size(); ip++) {
		v[ip] = root[ip] > 0.0 ? e + units.kinetic_coeff*lap[ip]/root[ip] : e;
	}
	return v;
}

}

#endif
