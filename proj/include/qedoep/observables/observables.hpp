#ifndef QEDOEP__OBSERVABLES__OBSERVABLES
#define QEDOEP__OBSERVABLES__OBSERVABLES

#include <qedoep/oracle/exact_diag.hpp>
#include <qedoep/realspace/field_io.hpp>
#include <qedoep/scf/ground_state.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qedoep {

// Ordered key = value record; numbers are stored in shortest round-trip form.
class observables_record {

	std::vector<std::pair<std::string, std::string>> entries_;

public:

	void set(std::string const & key, std::string const & value) {
		if(key.empty() || key.find_first_of(" =\t\n") != std::string::npos) throw std::invalid_argument("observables: invalid key '" + key + "'");
		for(auto & entry : entries_) {
			if(entry.first == key) {
				entry.second = value;
				return;
			}
		}
		entries_.emplace_back(key, value);
	}

	void set(std::string const & key, double value) { set(key, format_double(value)); }
	void set(std::string const & key, int value) { set(key, std::to_string(value)); }
	void set(std::string const & key, bool value) { set(key, std::string(value ? "true" : "false")); }

	bool has(std::string const & key) const {
		return std::any_of(entries_.begin(), entries_.end(), [&](auto const & e) { return e.first == key; });
	}

	std::string const & text(std::string const & key) const {
		for(auto const & entry : entries_) if(entry.first == key) return entry.second;
		throw std::out_of_range("observables: no entry '" + key + "'");
	}

	double number(std::string const & key) const {
		return parse_double(text(key));
	}

	bool is_number(std::string const & key) const {
		try {
			parse_double(text(key));
			return true;
		} catch(std::invalid_argument const &) {
			return false;
		}
	}

	std::vector<std::pair<std::string, std::string>> const & entries() const { return entries_; }

	friend bool operator==(observables_record const & a, observables_record const & b) {
		return a.entries_ == b.entries_;
	}

};

inline void write_record(std::ostream & out, observables_record const & rec) {
	for(auto const & [key, value] : rec.entries()) out << key << " = " << value << '\n';
}

inline observables_record read_record(std::istream & in) {
	observables_record rec;
	std::string line;
	while(std::getline(in, line)) {
		if(line.empty() || line[0] == '#') continue;
		auto eq = line.find(" = ");
		if(eq == std::string::npos) throw std::runtime_error("observables: malformed line '" + line + "'");
		rec.set(line.substr(0, eq), line.substr(eq + 3));
	}
	return rec;
}

inline void save_record(std::string const & path, observables_record const & rec) {
	std::ofstream out(path);
	if(!out) throw std::runtime_error("cannot write '" + path + "'");
	write_record(out, rec);
}

inline observables_record load_record(std::string const & path) {
	std::ifstream in(path);
	if(!in) throw std::runtime_error("cannot read '" + path + "'");
	return read_record(in);
}

// electronic dipole int r n(r) dr about the grid origin
inline std::array<double, 2> dipole_moment(field const & density) {
	auto const & mesh = density.mesh();
	std::array<double, 2> result{0.0, 0.0};
	for(std::size_t ip = 0; ip < mesh.size(); ip++) {
		auto r = mesh.point(ip);
		result[0] += r[0]*density[ip];
		result[1] += r[1]*density[ip];
	}
	result[0] *= mesh.cell_volume();
	result[1] *= mesh.cell_volume();
	return result;
}

struct photon_number_terms {
	double quantum = 0.0;     // sum <Phi1|Phi1>
	double classical = 0.0;   // (lambda.<R>)^2/(2w)
	double total() const { return quantum + classical; }
};

// n_pt = sum_i <Phi1_i|Phi1_i> + (lambda.<R>)^2/(2w), <R> the electronic dipole
inline photon_number_terms photon_number(ks_state const & st, std::vector<photon_mode> const & modes, std::size_t alpha) {
	if(alpha >= modes.size()) throw std::out_of_range("photon_number: mode index out of range");
	photon_number_terms terms;
	auto const & mode = modes[alpha];
	if(!mode.coupled()) return terms;
	for(auto const & ch : st.channels) {
		for(auto const & row : ch.shifts.phi1) terms.quantum += ch.occupancy*inner_product(row[alpha], row[alpha]);
	}
	double dl = mode.project(dipole_moment(st.density));
	terms.classical = dl*dl/(2.0*mode.omega);
	return terms;
}

// A(r) = <n(r)(a + a^dagger)> = -(sum_i phi_i Phi1_i + c.c.) + sqrt(2/w) (lambda.<R>) n(r).
// Phi1 solves (h - e + w) Phi1 = -sqrt(w/2) Q d phi, the negative of the
// one-photon amplitude of the coupled state, hence the sign of the orbital
// term. `classical = false` drops the dipole term (reference point R_0 = 0).
inline field correlation_A(ks_state const & st, std::vector<photon_mode> const & modes, std::size_t alpha, bool classical = true) {
	if(alpha >= modes.size()) throw std::out_of_range("correlation_A: mode index out of range");
	auto const & mode = modes[alpha];
	field result(st.mesh);
	if(!mode.coupled()) return result;
	for(auto const & ch : st.channels) {
		for(std::size_t i = 0; i < ch.orbitals.size(); i++) result.axpy(-2.0*ch.occupancy, ch.orbitals[i]*ch.shifts.phi1[i][alpha]);
	}
	if(classical) result.axpy(std::sqrt(2.0/mode.omega)*mode.project(dipole_moment(st.density)), st.density);
	return result;
}

inline observables_record energies_and_gaps(scf_problem const & problem, ground_state_result const & result) {
	auto const & st = result.state;
	observables_record rec;
	rec.set("method", to_string(problem.method));
	rec.set("converged", result.converged);
	rec.set("iterations", int(result.log.size()));
	rec.set("E_tot", result.energy.total);
	rec.set("E_kinetic", result.energy.kinetic);
	rec.set("E_external", result.energy.external);
	rec.set("E_hartree", result.energy.hartree);
	rec.set("E_x_electron", result.energy.xc.e_x_electron);
	for(std::size_t a = 0; a < problem.modes.size(); a++) {
		auto terms = photon_number(st, problem.modes, a);
		auto tag = std::to_string(a);
		rec.set("E_x_photon_" + tag, a < result.energy.xc.e_x_photon.size() ? result.energy.xc.e_x_photon[a] : 0.0);
		rec.set("n_pt_" + tag, terms.total());
		rec.set("n_pt_quantum_" + tag, terms.quantum);
		rec.set("n_pt_classical_" + tag, terms.classical);
	}

	double homo = -INFINITY, lumo = INFINITY, lowest = INFINITY;
	for(auto const & ch : st.channels) {
		for(auto e : ch.energies) {
			homo = std::max(homo, e);
			lowest = std::min(lowest, e);
		}
		if(std::isfinite(ch.lumo)) lumo = std::min(lumo, ch.lumo);
	}
	rec.set("homo", homo);
	rec.set("lowest_to_homo", homo - lowest);
	if(std::isfinite(lumo)) {
		rec.set("lumo", lumo);
		rec.set("gap", lumo - homo);
	} else {
		rec.set("lumo_failed", true);
	}
	auto dip = dipole_moment(st.density);
	rec.set("dipole_x", dip[0]);
	rec.set("dipole_y", dip[1]);
	double worst = 0.0;
	for(auto const & ch : st.channels) worst = std::max({worst, ch.residual_photon, ch.residual_electron});
	rec.set("max_S", worst);
	rec.set("charge", integral(st.density));
	return rec;
}

inline observables_record exact_record(exact_state const & st, exact_observables_record const & ob) {
	observables_record rec;
	rec.set("method", std::string("exact"));
	rec.set("converged", st.converged);
	rec.set("iterations", st.iterations);
	rec.set("E_tot", ob.energy);
	rec.set("n_pt_0", ob.n_pt);
	rec.set("double_occupancy_0", ob.double_occupancy);
	rec.set("fock_cutoff", st.mode.fock_cutoff);
	rec.set("top_fock_weight", st.top_weight);
	if(st.cutoff_shift) {
		rec.set("cutoff_shift", *st.cutoff_shift);
		rec.set("cutoff_converged", st.cutoff_converged);
	}
	rec.set("parity", st.parity);
	rec.set("dipole_x", ob.dipole[0]);
	rec.set("dipole_y", ob.dipole[1]);
	rec.set("residual", st.residual);
	rec.set("charge", integral(ob.density));
	return rec;
}

}

#endif
