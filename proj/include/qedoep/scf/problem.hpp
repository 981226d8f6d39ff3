#ifndef QEDOEP__SCF__PROBLEM
#define QEDOEP__SCF__PROBLEM

#include <qedoep/hamiltonian/external_potential.hpp>
#include <qedoep/hamiltonian/ks_operator.hpp>
#include <qedoep/hamiltonian/photon_mode.hpp>
#include <qedoep/photon_xc/oep.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

enum class photon_method { none, kli, oep };

inline photon_method parse_photon_method(std::string const & name) {
	if(name == "none") return photon_method::none;
	if(name == "kli") return photon_method::kli;
	if(name == "oep") return photon_method::oep;
	throw std::invalid_argument("unknown exchange method '" + name + "'");
}

inline std::string to_string(photon_method method) {
	switch(method) {
	case photon_method::none: return "none";
	case photon_method::kli: return "kli";
	case photon_method::oep: return "oep";
	}
	return "none";
}

struct scf_problem {
	grid mesh = grid::plane(127, 0.7052);
	unit_system units = unit_system::gaas();
	int stencil_order = 4;
	external_potential potential = quantum_ring{};
	spin_config spin = spin_config::single();
	std::vector<photon_mode> modes;
	// soft-Coulomb electron interaction (1D only); absent for the ring
	std::optional<double> interaction_softening;
	bool electron_exchange = false;
	photon_method method = photon_method::oep;

	void validate() const {
		units.validate();
		spin.validate();
		check_stencil(mesh, stencil_order);
		for(auto const & mode : modes) mode.validate(mesh.ndim());
		if(interaction_softening) {
			if(mesh.ndim() != 1) throw std::invalid_argument("problem: electron interaction is only available in 1D");
			if(!(*interaction_softening > 0.0)) throw std::invalid_argument("problem: interaction softening must be positive");
		}
		if(electron_exchange && !interaction_softening) throw std::invalid_argument("problem: electron exchange needs an interaction");
		if(std::size_t(std::max(spin.n_up, spin.n_down)) >= mesh.size()) throw std::invalid_argument("problem: more orbitals than grid points");
	}
};

struct scf_options {
	double tol_density = 1e-8;
	double tol_S = 1e-10;          // on max|S| (OEP) or max|dv_x| (KLI)
	int max_outer = 100;
	int min_outer = 2;
	double mixing = 0.3;
	double c = 0.1;
	inner_method inner = inner_method::cg;
	int inner_steps = 60;
	std::uint64_t seed = 1;
	double symmetry_break = 0.0;
	double eig_tol = 1e-9;
	int eig_max_iter = 2000;
	double stern_tol = 1e-9;
	int stern_max_iter = 0;
	double energy_window = 1e-6;   // relative E_tot spread over the last 10 iterations

	void validate() const {
		if(!(tol_density > 0.0) || !(tol_S > 0.0) || !(eig_tol > 0.0) || !(stern_tol > 0.0)) throw std::invalid_argument("scf: tolerances must be positive");
		if(!(mixing > 0.0 && mixing <= 1.0)) throw std::invalid_argument("scf: mixing must lie in (0, 1]");
		if(!(c > 0.0)) throw std::invalid_argument("scf: step c must be positive");
		if(max_outer < 1 || inner_steps < 1) throw std::invalid_argument("scf: iteration limits must be positive");
	}
};

}

#endif
