#ifndef QEDOEP__HAMILTONIAN__KS_OPERATOR
#define QEDOEP__HAMILTONIAN__KS_OPERATOR

#include <qedoep/hamiltonian/units.hpp>
#include <qedoep/realspace/laplacian.hpp>

#include <span>
#include <stdexcept>

namespace qedoep {

struct spin_config {
	int n_up = 1;
	int n_down = 0;
	bool restricted = false;

	void validate() const {
		if(n_up < 0 || n_down < 0 || n_up + n_down < 1) throw std::invalid_argument("spin_config: need at least one electron");
		if(restricted && n_up != n_down) throw std::invalid_argument("spin_config: restricted mode needs n_up = n_down");
	}

	int electrons() const { return n_up + n_down; }

	static spin_config single() { return {1, 0, false}; }
	static spin_config closed_shell(int pairs) { return {pairs, pairs, true}; }
};

// -kinetic_coeff lap + vs, applied matrix-free
class ks_hamiltonian {

	field vs_;
	double kinetic_coeff_;
	int order_;

public:

	ks_hamiltonian(field vs, unit_system const & units, int order = 4):
		vs_(std::move(vs)), kinetic_coeff_(units.kinetic_coeff), order_(order) {
		units.validate();
		check_stencil(vs_.mesh(), order_);
	}

	grid const & mesh() const { return vs_.mesh(); }
	field const & potential() const { return vs_; }
	double kinetic_coeff() const { return kinetic_coeff_; }
	int order() const { return order_; }

	void apply(std::span<double const> in, std::span<double> out) const {
		laplacian_apply(vs_.mesh(), order_, in, out, -kinetic_coeff_);
		for(std::size_t ip = 0; ip < out.size(); ip++) out[ip] += vs_[ip]*in[ip];
	}

	field operator()(field const & f) const {
		check_same_grid(vs_.mesh(), f.mesh(), "apply_hs");
		field result(f.mesh());
		apply(f.span(), result.span());
		return result;
	}

};

inline field apply_hs(field const & vs, unit_system const & units, field const & f, int order = 4) {
	check_same_grid(vs.mesh(), f.mesh(), "apply_hs");
	return ks_hamiltonian(vs, units, order)(f);
}

}

#endif
