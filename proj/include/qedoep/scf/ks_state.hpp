#ifndef QEDOEP__SCF__KS_STATE
#define QEDOEP__SCF__KS_STATE

#include <qedoep/scf/problem.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace qedoep {

struct channel_state {
	double occupancy = 1.0;
	int occupied = 0;
	std::vector<field> orbitals;
	std::vector<double> energies;
	double lumo = std::numeric_limits<double>::quiet_NaN();
	field v_x_electron;
	field v_x_photon;
	shift_set shifts;                     // at the potentials that produced the orbitals
	std::vector<field> psi_photon;        // warm starts for the next inner solve
	std::vector<field> psi_electron;
	double residual_photon = 0.0;
	double residual_electron = 0.0;
};

struct ks_state {
	grid mesh;
	unit_system units;
	int stencil_order = 4;
	spin_config spin;
	field v_ext;
	field v_hartree;
	field density;
	std::vector<channel_state> channels;
	std::uint64_t revision = 0;
	int iteration = 0;

	field v_s(std::size_t channel) const {
		auto const & ch = channels[channel];
		return v_ext + v_hartree + ch.v_x_electron + ch.v_x_photon;
	}

	ks_system system(std::size_t channel) const {
		auto const & ch = channels[channel];
		return ks_system(ks_hamiltonian(v_s(channel), units, stencil_order), ch.orbitals, ch.energies, revision);
	}

	double electrons() const {
		return double(spin.electrons());
	}
};

// int |n_new - n_old| dr
inline double density_residual(field const & n_new, field const & n_old) {
	check_same_grid(n_new.mesh(), n_old.mesh(), "density_residual");
	return integral_abs(n_new - n_old);
}

}

#endif
