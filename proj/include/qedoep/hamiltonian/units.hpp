#ifndef QEDOEP__HAMILTONIAN__UNITS
#define QEDOEP__HAMILTONIAN__UNITS

#include <stdexcept>
#include <string>

namespace qedoep {

// hbar^2/m_e in meV nm^2
inline constexpr double hbar2_over_electron_mass = 76.19964231;

struct unit_system {
	double kinetic_coeff;     // hbar^2/(2m), energy*length^2
	std::string energy_unit;
	std::string length_unit;

	void validate() const {
		if(!(kinetic_coeff > 0.0)) throw std::invalid_argument("unit_system: kinetic coefficient must be positive");
	}

	static unit_system atomic() {
		return {0.5, "Ha", "bohr"};
	}

	// effective-mass semiconductor units, meV and nm
	static unit_system effective_mass(double mass_ratio) {
		if(!(mass_ratio > 0.0)) throw std::invalid_argument("unit_system: mass ratio must be positive");
		return {hbar2_over_electron_mass/(2.0*mass_ratio), "meV", "nm"};
	}

	static unit_system gaas() {
		return effective_mass(0.067);
	}
};

}

#endif
