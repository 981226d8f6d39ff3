#ifndef QEDOEP__HAMILTONIAN__EXTERNAL_POTENTIAL
#define QEDOEP__HAMILTONIAN__EXTERNAL_POTENTIAL

#include <qedoep/hamiltonian/units.hpp>
#include <qedoep/realspace/field.hpp>
#include <qedoep/realspace/field_io.hpp>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace qedoep {

// 1/2 m0 w0^2 r^2 + V0 exp(-r^2/d^2), meV and nm
struct quantum_ring {
	double hbar_omega0 = 10.0;
	double v0 = 200.0;
	double width = 10.0;
	double mass_ratio = 0.067;
};

// ring plus a linear bias V0bar (e.r); e is used as given
struct quantum_ring_biased {
	quantum_ring ring;
	double bias = 0.1123;
	std::array<double, 2> direction{1.0, 1.0};
};

struct soft_coulomb_chain {
	std::vector<double> positions;
	std::vector<double> charges;
	double softening = 1.0;

	// n_dimers two-atom units, bond length `bond`, dimer centres `period`
	// apart, chain centred on the origin
	static soft_coulomb_chain dimers(int n_dimers, double bond, double period, double charge = 1.0, double softening = 1.0) {
		if(n_dimers < 1) throw std::invalid_argument("soft_coulomb_chain: need at least one dimer");
		soft_coulomb_chain chain;
		chain.softening = softening;
		for(int id = 0; id < n_dimers; id++) {
			double centre = (double(id) - 0.5*double(n_dimers - 1))*period;
			chain.positions.push_back(centre - 0.5*bond);
			chain.positions.push_back(centre + 0.5*bond);
			chain.charges.push_back(charge);
			chain.charges.push_back(charge);
		}
		return chain;
	}

	double total_charge() const {
		double sum = 0.0;
		for(auto q : charges) sum += q;
		return sum;
	}
};

struct tabulated_potential {
	std::string path;
};

using external_potential = std::variant<quantum_ring, quantum_ring_biased, soft_coulomb_chain, tabulated_potential>;

namespace detail {

inline double ring_value(quantum_ring const & ring, double r2) {
	auto kc = unit_system::effective_mass(ring.mass_ratio).kinetic_coeff;
	// 1/2 m w^2 = (hbar w)^2/(4 hbar^2/2m)
	return ring.hbar_omega0*ring.hbar_omega0/(4.0*kc)*r2 + ring.v0*std::exp(-r2/(ring.width*ring.width));
}

inline void check_ring(quantum_ring const & ring) {
	if(!(ring.hbar_omega0 > 0.0) || !(ring.width > 0.0) || !(ring.mass_ratio > 0.0)) {
		throw std::invalid_argument("quantum_ring: omega0, width and mass must be positive");
	}
	if(!std::isfinite(ring.v0)) throw std::invalid_argument("quantum_ring: V0 must be finite");
}

}

inline field build_vext(external_potential const & pot, grid const & mesh) {
	field result(mesh);

	if(auto ring = std::get_if<quantum_ring>(&pot)) {
		if(mesh.ndim() != 2) throw std::invalid_argument("quantum_ring: requires a 2D grid");
		detail::check_ring(*ring);
		result = field::from_function(mesh, [&](auto const & r) { return detail::ring_value(*ring, r[0]*r[0] + r[1]*r[1]); });

	} else if(auto biased = std::get_if<quantum_ring_biased>(&pot)) {
		if(mesh.ndim() != 2) throw std::invalid_argument("quantum_ring_biased: requires a 2D grid");
		detail::check_ring(biased->ring);
		auto const & e = biased->direction;
		result = field::from_function(mesh, [&](auto const & r) {
			return detail::ring_value(biased->ring, r[0]*r[0] + r[1]*r[1]) + biased->bias*(e[0]*r[0] + e[1]*r[1]);
		});

	} else if(auto chain = std::get_if<soft_coulomb_chain>(&pot)) {
		if(mesh.ndim() != 1) throw std::invalid_argument("soft_coulomb_chain: requires a 1D grid");
		if(chain->positions.size() != chain->charges.size()) throw std::invalid_argument("soft_coulomb_chain: positions and charges differ in length");
		if(!(chain->softening > 0.0)) throw std::invalid_argument("soft_coulomb_chain: softening must be positive");
		auto a2 = chain->softening*chain->softening;
		result = field::from_function(mesh, [&](auto const & r) {
			double value = 0.0;
			for(std::size_t ia = 0; ia < chain->positions.size(); ia++) {
				double dx = r[0] - chain->positions[ia];
				value -= chain->charges[ia]/std::sqrt(dx*dx + a2);
			}
			return value;
		});

	} else {
		auto const & table = std::get<tabulated_potential>(pot);
		auto dump = load_field(table.path);
		if(dump.values.mesh() != mesh) throw std::invalid_argument("tabulated potential '" + table.path + "': grid shape mismatch");
		result = std::move(dump.values);
	}

	for(auto value : result) {
		if(!std::isfinite(value)) throw std::domain_error("build_vext: potential is not finite");
	}
	return result;
}

}

#endif
