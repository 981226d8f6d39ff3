#ifndef QEDOEP__HAMILTONIAN__PHOTON_MODE
#define QEDOEP__HAMILTONIAN__PHOTON_MODE

#include <qedoep/realspace/field.hpp>

#include <array>
#include <cmath>
#include <stdexcept>

namespace qedoep {

// A single cavity mode in dipole approximation. `lambda` is the coupling
// vector lambda_alpha*e_alpha; the external current is always zero.
struct photon_mode {
	double omega = 1.0;
	std::array<double, 2> lambda{0.0, 0.0};
	int fock_cutoff = 41;

	static constexpr double j_ext = 0.0;

	void validate(int ndim) const {
		if(!(omega > 0.0)) throw std::invalid_argument("photon_mode: omega must be positive");
		if(fock_cutoff < 2) throw std::invalid_argument("photon_mode: fock_cutoff must be at least 2");
		if(!std::isfinite(lambda[0]) || !std::isfinite(lambda[1])) throw std::invalid_argument("photon_mode: coupling must be finite");
		if(ndim == 1 && lambda[1] != 0.0) throw std::invalid_argument("photon_mode: coupling has more components than the grid");
	}

	bool coupled() const {
		return lambda[0] != 0.0 || lambda[1] != 0.0;
	}

	double project(std::array<double, 2> const & r) const {
		return lambda[0]*r[0] + lambda[1]*r[1];
	}
};

// lambda . r on every grid point (R_0 at the grid origin)
inline field dipole_field(photon_mode const & mode, grid const & mesh) {
	mode.validate(mesh.ndim());
	return field::from_function(mesh, [&](auto const & r) { return mode.project(r); });
}

inline field dipole_apply(photon_mode const & mode, field const & f) {
	return dipole_field(mode, f.mesh())*f;
}

}

#endif
