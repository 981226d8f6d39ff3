#ifndef QEDOEP__STERNHEIMER__STERNHEIMER
#define QEDOEP__STERNHEIMER__STERNHEIMER

#include <qedoep/eigensolver/eigensolver.hpp>
#include <qedoep/hamiltonian/ks_operator.hpp>
#include <qedoep/hamiltonian/photon_mode.hpp>
#include <qedoep/realspace/kinetic_preconditioner.hpp>
#include <qedoep/sternheimer/minres.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

// Occupied orbitals of one spin channel together with the Hamiltonian that
// produced them.
struct ks_system {
	ks_hamiltonian hamiltonian;
	std::vector<field> orbitals;
	std::vector<double> energies;
	std::shared_ptr<kinetic_preconditioner const> preconditioner;
	std::uint64_t revision = 0;

	ks_system(ks_hamiltonian h, std::vector<field> occupied, std::vector<double> eps, std::uint64_t rev = 0):
		hamiltonian(std::move(h)), orbitals(std::move(occupied)), energies(std::move(eps)), revision(rev) {
		if(orbitals.size() != energies.size()) throw std::invalid_argument("ks_system: orbital and energy counts differ");
		for(auto const & phi : orbitals) check_same_grid(hamiltonian.mesh(), phi.mesh(), "ks_system");
		auto const & mesh = hamiltonian.mesh();
		preconditioner = std::make_shared<kinetic_preconditioner>(mesh, hamiltonian.order(), hamiltonian.kinetic_coeff(),
		                                                          default_precond_shift(mesh, hamiltonian.kinetic_coeff()));
	}

	grid const & mesh() const { return hamiltonian.mesh(); }
	std::size_t occupied() const { return orbitals.size(); }

	std::size_t homo() const {
		if(energies.empty()) throw std::logic_error("ks_system: no occupied orbitals");
		return std::size_t(std::max_element(energies.begin(), energies.end()) - energies.begin());
	}
};

struct shifted_solve {
	double mu = 0.0;
	field rhs;
	std::vector<field> projector;    // orthonormal set removed from rhs and solution
	double tol = 1e-9;
	int max_iter = 0;                // 0 selects 10*sqrt(grid points)
	std::optional<field> initial;
};

struct shifted_solution {
	field x;
	minres_report report;
	bool ill_conditioned = false;
};

struct sternheimer_error : std::runtime_error {
	using std::runtime_error::runtime_error;
};

inline int default_max_iter(grid const & mesh) {
	return int(10.0*std::sqrt(double(mesh.size())));
}

// removes the span of an orthonormal set (grid measure) from f
inline void project_out(std::vector<field> const & set, std::span<double> f) {
	for(auto const & phi : set) {
		double coef = 0.0;
		for(std::size_t ip = 0; ip < f.size(); ip++) coef += phi[ip]*f[ip];
		coef *= phi.mesh().cell_volume();
		for(std::size_t ip = 0; ip < f.size(); ip++) f[ip] -= coef*phi[ip];
	}
}

inline void project_out(std::vector<field> const & set, field & f) {
	project_out(set, f.span());
}

// (h - mu) x = Q b with x in range(Q), Q = 1 - sum |p><p|
inline shifted_solution solve_shifted(ks_hamiltonian const & h, shifted_solve const & req, kinetic_preconditioner const * precond = nullptr) {
	auto const & mesh = h.mesh();
	check_same_grid(mesh, req.rhs.mesh(), "solve_shifted");
	if(!(req.tol > 0.0)) throw std::invalid_argument("solve_shifted: tolerance must be positive");
	for(auto const & value : req.rhs) {
		if(!std::isfinite(value)) throw std::invalid_argument("solve_shifted: right-hand side is not finite");
	}

	shifted_solution result{req.initial ? *req.initial : field(mesh), {}, false};
	check_same_grid(mesh, result.x.mesh(), "solve_shifted");

	auto mu = req.mu;
	vector_map apply_a = [&h, mu](std::span<double const> in, std::span<double> out) {
		h.apply(in, out);
		for(std::size_t ip = 0; ip < in.size(); ip++) out[ip] -= mu*in[ip];
	};
	vector_projection project;
	if(!req.projector.empty()) project = [&req](std::span<double> f) { project_out(req.projector, f); };
	vector_map apply_m;
	if(precond) apply_m = [precond](std::span<double const> in, std::span<double> out) { precond->apply(in, out); };

	int max_iter = req.max_iter > 0 ? req.max_iter : default_max_iter(mesh);
	result.report = minres(apply_a, req.rhs.span(), result.x.span(), apply_m, project, req.tol, max_iter);
	// no convergence within the budget usually means a nearly singular shift
	result.ill_conditioned = !result.report.converged;
	return result;
}

struct phi1_result {
	field phi1;
	minres_report report;
	bool resonant = false;
};

// (h - e_i + w) Phi1_i = -sqrt(w/2) Q d phi_i, Q projecting out the occupied space
inline phi1_result phi1_solve(ks_system const & ks, photon_mode const & mode, std::size_t i, double tol = 1e-9,
                              int max_iter = 0, std::optional<field> initial = std::nullopt) {
	if(i >= ks.occupied()) throw std::out_of_range("phi1_solve: orbital index out of range");
	mode.validate(ks.mesh().ndim());

	phi1_result result{field(ks.mesh()), {}, false};
	if(!mode.coupled()) {
		result.report.converged = true;
		return result;
	}

	double mu = ks.energies[i] - mode.omega;
	for(auto ek : ks.energies) {
		if(std::abs(ek - mu) < 1e-8) result.resonant = true;
	}

	shifted_solve req{mu, dipole_apply(mode, ks.orbitals[i])*(-std::sqrt(0.5*mode.omega)), ks.orbitals, tol, max_iter, std::move(initial)};
	auto sol = solve_shifted(ks.hamiltonian, req, ks.preconditioner.get());
	result.phi1 = std::move(sol.x);
	result.report = sol.report;
	return result;
}

struct psi_result {
	field psi;
	minres_report report;
};

// (h - e_i) psi_i = M_i - <M_i|phi_i> phi_i with psi_i orthogonal to phi_i
// (and to any occupied orbital degenerate with it)
inline psi_result psi_solve(ks_system const & ks, field const & m_i, std::size_t i, double tol = 1e-9,
                            int max_iter = 0, std::optional<field> initial = std::nullopt) {
	if(i >= ks.occupied()) throw std::out_of_range("psi_solve: orbital index out of range");
	check_same_grid(ks.mesh(), m_i.mesh(), "psi_solve");

	std::vector<field> degenerate;
	for(std::size_t k = 0; k < ks.occupied(); k++) {
		if(k == i || std::abs(ks.energies[k] - ks.energies[i]) < 1e-8) degenerate.push_back(ks.orbitals[k]);
	}

	shifted_solve req{ks.energies[i], m_i, std::move(degenerate), tol, max_iter, std::move(initial)};
	auto sol = solve_shifted(ks.hamiltonian, req, ks.preconditioner.get());
	return {std::move(sol.x), sol.report};
}

}

#endif
