#ifndef QEDOEP__CLI__RUN_CONFIG
#define QEDOEP__CLI__RUN_CONFIG

#include <qedoep/oracle/exact_diag.hpp>
#include <qedoep/scf/problem.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

struct config_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

enum class run_mode { exact, oep, kli, compare, sweep };

inline run_mode parse_run_mode(std::string const & name) {
	if(name == "exact") return run_mode::exact;
	if(name == "oep") return run_mode::oep;
	if(name == "kli") return run_mode::kli;
	if(name == "compare") return run_mode::compare;
	if(name == "sweep") return run_mode::sweep;
	throw config_error("run.mode: unknown mode '" + name + "' (exact, oep, kli, compare, sweep)");
}

inline std::string to_string(run_mode mode) {
	switch(mode) {
	case run_mode::exact: return "exact";
	case run_mode::oep: return "oep";
	case run_mode::kli: return "kli";
	case run_mode::compare: return "compare";
	case run_mode::sweep: return "sweep";
	}
	return "exact";
}

// Everything that defines a run. The potential and mode descriptions are
// kept in config form so the echo can reproduce them.
struct run_config {
	// [run]
	run_mode mode = run_mode::oep;
	std::string label = "run";
	std::string output;
	std::uint64_t seed = 1;
	std::vector<std::string> fields{"density"};
	bool dense_oracle = false;

	// [grid]
	int ndim = 2;
	int points = 127;
	double spacing = 0.7052;
	int stencil_order = 4;

	// [system]
	std::string units = "gaas";
	double mass_ratio = 0.067;
	std::string potential = "ring";
	double hbar_omega0 = 10.0;
	double v0 = 200.0;
	double width = 10.0;
	double bias = 0.1123;
	std::array<double, 2> bias_direction{1.0, 1.0};
	int dimers = 1;
	double bond = 2.0;
	double period = 6.0;
	double nuclear_charge = 1.0;
	double nuclear_softening = 1.0;
	std::string potential_file;
	int n_up = 1;
	int n_down = 0;
	bool restricted = false;
	double interaction_softening = 0.0;   // 0 means no electron interaction
	bool electron_exchange = false;

	// [mode] or [mode.N]
	struct mode_block {
		double omega = 1.41;
		double coupling = 0.0;
		std::array<double, 2> polarization{1.0, 1.0};
		int fock_cutoff = 41;
	};
	std::vector<mode_block> modes;

	// [solver]
	scf_options scf;
	std::optional<double> kli_mixing;
	std::optional<double> kli_tol_S;   // KLI tests the change of v_x, not an OEP residual
	exact_options exact;

	// [sweep]
	std::string sweep_parameter = "coupling";
	std::vector<double> sweep_values;
	run_mode sweep_mode = run_mode::exact;

	grid mesh() const {
		return ndim == 1 ? grid::line(points, spacing) : grid::plane(points, spacing);
	}

	unit_system unit_set() const {
		if(units == "gaas") return unit_system::gaas();
		if(units == "atomic") return unit_system::atomic();
		return unit_system::effective_mass(mass_ratio);
	}

	external_potential potential_model() const {
		quantum_ring ring{hbar_omega0, v0, width, mass_ratio};
		if(potential == "ring") return ring;
		if(potential == "ring_biased") return quantum_ring_biased{ring, bias, bias_direction};
		if(potential == "dimer_chain") return soft_coulomb_chain::dimers(dimers, bond, period, nuclear_charge, nuclear_softening);
		return tabulated_potential{potential_file};
	}

	std::vector<photon_mode> photon_modes() const {
		std::vector<photon_mode> result;
		for(auto const & m : modes) result.push_back({m.omega, {m.coupling*m.polarization[0], m.coupling*m.polarization[1]}, m.fock_cutoff});
		return result;
	}

	scf_problem problem(photon_method method) const {
		scf_problem p;
		p.mesh = mesh();
		p.units = unit_set();
		p.stencil_order = stencil_order;
		p.potential = potential_model();
		p.spin = spin_config{n_up, n_down, restricted};
		p.modes = photon_modes();
		if(interaction_softening > 0.0) p.interaction_softening = interaction_softening;
		p.electron_exchange = electron_exchange;
		p.method = method;
		return p;
	}

	scf_options scf_for(photon_method method) const {
		auto o = scf;
		o.seed = seed;
		if(method == photon_method::kli && kli_mixing) o.mixing = *kli_mixing;
		if(method == photon_method::kli && kli_tol_S) o.tol_S = *kli_tol_S;
		return o;
	}

	exact_options exact_for() const {
		auto o = exact;
		o.seed = seed;
		return o;
	}

	// configuration for one sweep point
	run_config at_sweep_point(double value) const {
		auto c = *this;
		c.mode = sweep_mode;
		c.sweep_values.clear();
		for(auto & m : c.modes) {
			if(sweep_parameter == "coupling") m.coupling = value;
			else m.omega = value;
		}
		return c;
	}

	// compare mode includes the exact run only where it exists
	bool exact_supported() const {
		return n_up + n_down == 1 && modes.size() == 1;
	}

	void validate() const;
};

namespace detail {

inline std::vector<std::string> split_list(std::string const & text) {
	std::vector<std::string> items;
	std::stringstream in(text);
	std::string item;
	while(std::getline(in, item, ',')) {
		auto b = item.find_first_not_of(" \t");
		auto e = item.find_last_not_of(" \t\r");
		if(b == std::string::npos) throw config_error("empty item in list '" + text + "'");
		items.push_back(item.substr(b, e - b + 1));
	}
	return items;
}

inline double to_number(std::string const & where, std::string const & text) {
	try {
		return parse_double(text);
	} catch(std::invalid_argument const &) {
		throw config_error(where + ": expected a number, got '" + text + "'");
	}
}

inline int to_integer(std::string const & where, std::string const & text) {
	double value = to_number(where, text);
	if(value != double(int(value))) throw config_error(where + ": expected an integer, got '" + text + "'");
	return int(value);
}

inline bool to_bool(std::string const & where, std::string const & text) {
	if(text == "true" || text == "yes" || text == "1") return true;
	if(text == "false" || text == "no" || text == "0") return false;
	throw config_error(where + ": expected true or false, got '" + text + "'");
}

inline std::array<double, 2> to_pair(std::string const & where, std::string const & text) {
	auto items = split_list(text);
	if(items.size() != 2) throw config_error(where + ": expected two comma-separated numbers");
	return {to_number(where, items[0]), to_number(where, items[1])};
}

inline std::string join(std::vector<std::string> const & items) {
	std::string out;
	for(std::size_t i = 0; i < items.size(); i++) out += (i ? ", " : "") + items[i];
	return out;
}

inline std::uint64_t fnv1a(std::string const & text) {
	std::uint64_t h = 14695981039346656037ull;
	for(unsigned char ch : text) {
		h ^= ch;
		h *= 1099511628211ull;
	}
	return h;
}

// reads the keys of one section, rejecting any key not in `allowed`
class section_reader {

	std::string name_;
	std::map<std::string, std::string> values_;

public:

	section_reader(std::string name, boost::property_tree::ptree const & tree, std::set<std::string> const & allowed): name_(std::move(name)) {
		for(auto const & [key, node] : tree) {
			if(!node.empty()) throw config_error("[" + name_ + "]: nested entry '" + key + "'");
			if(!allowed.count(key)) throw config_error("[" + name_ + "]: unknown key '" + key + "'");
			values_[key] = node.data();
		}
	}

	bool has(std::string const & key) const { return values_.count(key) != 0; }
	std::string where(std::string const & key) const { return name_ + "." + key; }

	void get(std::string const & key, std::string & out) const { if(has(key)) out = values_.at(key); }
	void get(std::string const & key, double & out) const { if(has(key)) out = to_number(where(key), values_.at(key)); }
	void get(std::string const & key, int & out) const { if(has(key)) out = to_integer(where(key), values_.at(key)); }
	void get(std::string const & key, bool & out) const { if(has(key)) out = to_bool(where(key), values_.at(key)); }
	void get(std::string const & key, std::array<double, 2> & out) const { if(has(key)) out = to_pair(where(key), values_.at(key)); }

	void get(std::string const & key, std::uint64_t & out) const {
		if(!has(key)) return;
		auto const & text = values_.at(key);
		if(text.empty() || text.find_first_not_of("0123456789") != std::string::npos) throw config_error(where(key) + ": expected a non-negative integer");
		out = std::stoull(text);
	}

	void get(std::string const & key, std::vector<double> & out) const {
		if(!has(key)) return;
		out.clear();
		for(auto const & item : split_list(values_.at(key))) out.push_back(to_number(where(key), item));
	}

	void get(std::string const & key, std::vector<std::string> & out) const {
		if(has(key)) out = split_list(values_.at(key));
	}

};

}

inline run_config parse_config(std::istream & in, std::string const & source = "config") {
	boost::property_tree::ptree tree;
	try {
		boost::property_tree::read_ini(in, tree);
	} catch(boost::property_tree::ini_parser_error const & e) {
		throw config_error(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
	}

	run_config c;
	std::set<std::string> seen;
	for(auto const & [section, node] : tree) {
		if(node.empty()) throw config_error("key '" + section + "' outside of a section");
		if(!seen.insert(section).second) throw config_error("duplicate section [" + section + "]");

		if(section == "run") {
			detail::section_reader r(section, node, {"mode", "label", "output", "seed", "fields", "dense_oracle"});
			std::string mode;
			r.get("mode", mode);
			if(!mode.empty()) c.mode = parse_run_mode(mode);
			r.get("label", c.label);
			r.get("output", c.output);
			r.get("seed", c.seed);
			r.get("fields", c.fields);
			r.get("dense_oracle", c.dense_oracle);

		} else if(section == "grid") {
			detail::section_reader r(section, node, {"ndim", "points", "spacing", "stencil_order"});
			r.get("ndim", c.ndim);
			r.get("points", c.points);
			r.get("spacing", c.spacing);
			r.get("stencil_order", c.stencil_order);

		} else if(section == "system") {
			detail::section_reader r(section, node, {"units", "mass_ratio", "potential", "hbar_omega0", "v0", "width", "bias", "bias_direction",
			                                         "dimers", "bond", "period", "nuclear_charge", "nuclear_softening", "potential_file",
			                                         "n_up", "n_down", "restricted", "interaction_softening", "electron_exchange"});
			r.get("units", c.units);
			r.get("mass_ratio", c.mass_ratio);
			r.get("potential", c.potential);
			std::map<std::string, std::vector<std::string>> specific{
				{"ring", {"hbar_omega0", "v0", "width"}},
				{"ring_biased", {"hbar_omega0", "v0", "width", "bias", "bias_direction"}},
				{"dimer_chain", {"dimers", "bond", "period", "nuclear_charge", "nuclear_softening"}},
				{"tabulated", {"potential_file"}}};
			if(!specific.count(c.potential)) throw config_error("system.potential: unknown potential '" + c.potential + "' (ring, ring_biased, dimer_chain, tabulated)");
			for(auto const & [kind, keys] : specific) {
				if(kind == c.potential) continue;
				for(auto const & key : keys) {
					auto const & own = specific.at(c.potential);
					if(r.has(key) && std::find(own.begin(), own.end(), key) == own.end()) {
						throw config_error("system." + key + " does not apply to potential '" + c.potential + "'");
					}
				}
			}
			r.get("hbar_omega0", c.hbar_omega0);
			r.get("v0", c.v0);
			r.get("width", c.width);
			r.get("bias", c.bias);
			r.get("bias_direction", c.bias_direction);
			r.get("dimers", c.dimers);
			r.get("bond", c.bond);
			r.get("period", c.period);
			r.get("nuclear_charge", c.nuclear_charge);
			r.get("nuclear_softening", c.nuclear_softening);
			r.get("potential_file", c.potential_file);
			r.get("n_up", c.n_up);
			r.get("n_down", c.n_down);
			r.get("restricted", c.restricted);
			r.get("interaction_softening", c.interaction_softening);
			r.get("electron_exchange", c.electron_exchange);

		} else if(section == "mode" || section.rfind("mode.", 0) == 0) {
			detail::section_reader r(section, node, {"omega", "coupling", "polarization", "fock_cutoff"});
			run_config::mode_block m;
			r.get("omega", m.omega);
			r.get("coupling", m.coupling);
			r.get("polarization", m.polarization);
			r.get("fock_cutoff", m.fock_cutoff);
			c.modes.push_back(m);

		} else if(section == "solver") {
			detail::section_reader r(section, node, {"tol_density", "tol_S", "max_outer", "min_outer", "mixing", "kli_mixing", "kli_tol_S", "step_c", "inner",
			                                         "inner_steps", "symmetry_break", "eig_tol", "eig_max_iter", "stern_tol", "stern_max_iter",
			                                         "energy_window", "exact_tol", "exact_max_iter", "exact_parity", "exact_check_cutoff"});
			r.get("tol_density", c.scf.tol_density);
			r.get("tol_S", c.scf.tol_S);
			r.get("max_outer", c.scf.max_outer);
			r.get("min_outer", c.scf.min_outer);
			r.get("mixing", c.scf.mixing);
			if(r.has("kli_mixing")) {
				double m = 0.0;
				r.get("kli_mixing", m);
				c.kli_mixing = m;
			}
			if(r.has("kli_tol_S")) {
				double t = 0.0;
				r.get("kli_tol_S", t);
				c.kli_tol_S = t;
			}
			r.get("step_c", c.scf.c);
			std::string inner;
			r.get("inner", inner);
			if(!inner.empty()) {
				try {
					c.scf.inner = parse_inner_method(inner);
				} catch(std::invalid_argument const & e) {
					throw config_error(std::string("solver.inner: ") + e.what());
				}
			}
			r.get("inner_steps", c.scf.inner_steps);
			r.get("symmetry_break", c.scf.symmetry_break);
			r.get("eig_tol", c.scf.eig_tol);
			r.get("eig_max_iter", c.scf.eig_max_iter);
			r.get("stern_tol", c.scf.stern_tol);
			r.get("stern_max_iter", c.scf.stern_max_iter);
			r.get("energy_window", c.scf.energy_window);
			r.get("exact_tol", c.exact.tol);
			r.get("exact_max_iter", c.exact.max_iter);
			r.get("exact_parity", c.exact.use_parity);
			r.get("exact_check_cutoff", c.exact.check_cutoff);

		} else if(section == "sweep") {
			detail::section_reader r(section, node, {"parameter", "values", "mode"});
			r.get("parameter", c.sweep_parameter);
			r.get("values", c.sweep_values);
			std::string mode;
			r.get("mode", mode);
			if(!mode.empty()) c.sweep_mode = parse_run_mode(mode);

		} else {
			throw config_error("unknown section [" + section + "]");
		}
	}
	c.validate();
	return c;
}

inline run_config load_config(std::string const & path) {
	std::ifstream in(path);
	if(!in) throw config_error("cannot read config '" + path + "'");
	return parse_config(in, path);
}

inline void run_config::validate() const {
	auto fail = [](std::string const & message) { throw config_error(message); };

	if(label.empty() || label.find_first_of("/ \t") != std::string::npos) fail("run.label must be a non-empty word");
	for(auto const & f : fields) {
		if(f != "density" && f != "v_x" && f != "v_s" && f != "A") fail("run.fields: unknown field '" + f + "' (density, v_x, v_s, A)");
	}
	if(ndim != 1 && ndim != 2) fail("grid.ndim must be 1 or 2");
	if(points < 3) fail("grid.points must be at least 3");
	if(!(spacing > 0.0)) fail("grid.spacing must be positive");
	if(units != "gaas" && units != "atomic" && units != "effective_mass") fail("system.units: unknown unit system '" + units + "' (gaas, atomic, effective_mass)");
	if(!(mass_ratio > 0.0)) fail("system.mass_ratio must be positive");
	if(potential == "ring" || potential == "ring_biased") {
		if(!(hbar_omega0 > 0.0) || !(width > 0.0)) fail("system: hbar_omega0 and width must be positive");
		if(ndim != 2) fail("system.potential: the ring needs a 2D grid");
	}
	if(potential == "dimer_chain") {
		if(dimers < 1) fail("system.dimers must be at least 1");
		if(!(bond >= 0.0) || !(period > 0.0) || !(nuclear_softening > 0.0)) fail("system: bond, period and nuclear_softening must be positive");
		if(ndim != 1) fail("system.potential: the dimer chain needs a 1D grid");
	}
	if(potential == "tabulated" && potential_file.empty()) fail("system.potential_file is required for a tabulated potential");
	if(interaction_softening < 0.0) fail("system.interaction_softening must not be negative");
	if(modes.empty()) fail("at least one [mode] section is required");
	for(auto const & m : modes) {
		if(!(m.omega > 0.0)) fail("mode.omega must be positive");
		if(m.coupling < 0.0) fail("mode.coupling must not be negative");
		if(m.fock_cutoff < 2) fail("mode.fock_cutoff must be at least 2");
	}
	if(kli_mixing && !(*kli_mixing > 0.0 && *kli_mixing <= 1.0)) fail("solver.kli_mixing must lie in (0, 1]");
	if(kli_tol_S && !(*kli_tol_S > 0.0)) fail("solver.kli_tol_S must be positive");
	if(!(exact.tol > 0.0) || exact.max_iter < 1) fail("solver: exact_tol and exact_max_iter must be positive");

	try {
		scf.validate();
		for(auto method : {photon_method::oep, photon_method::kli}) problem(method).validate();
	} catch(config_error const &) {
		throw;
	} catch(std::invalid_argument const & e) {
		fail(e.what());
	}

	bool needs_exact = mode == run_mode::exact || (mode == run_mode::sweep && sweep_mode == run_mode::exact);
	if(needs_exact && !exact_supported()) {
		fail("exact diagonalization supports a single electron coupled to a single mode");
	}
	if(mode == run_mode::sweep) {
		if(sweep_parameter != "coupling" && sweep_parameter != "omega") fail("sweep.parameter must be coupling or omega");
		if(sweep_values.empty()) fail("sweep.values must list at least one value");
		if(sweep_mode == run_mode::sweep) fail("sweep.mode cannot be sweep");
		for(auto v : sweep_values) {
			if(sweep_parameter == "omega" && !(v > 0.0)) fail("sweep.values: omega must be positive");
			if(sweep_parameter == "coupling" && v < 0.0) fail("sweep.values: coupling must not be negative");
		}
	}
	if(dense_oracle && mesh().size() > dense_limit) {
		fail("dense oracle checks need at most " + std::to_string(dense_limit) + " grid points");
	}
}

// Canonical form of the effective configuration; parses back to the same run.
inline std::string echo_config(run_config const & c) {
	std::ostringstream out;
	auto num = [](double v) { return format_double(v); };
	auto flag = [](bool v) { return std::string(v ? "true" : "false"); };
	auto pair = [&](std::array<double, 2> const & v) { return num(v[0]) + ", " + num(v[1]); };

	out << "[run]\n"
	    << "mode = " << to_string(c.mode) << '\n'
	    << "label = " << c.label << '\n'
	    << "seed = " << c.seed << '\n'
	    << "fields = " << detail::join(c.fields) << '\n'
	    << "dense_oracle = " << flag(c.dense_oracle) << '\n';

	out << "\n[grid]\n"
	    << "ndim = " << c.ndim << '\n'
	    << "points = " << c.points << '\n'
	    << "spacing = " << num(c.spacing) << '\n'
	    << "stencil_order = " << c.stencil_order << '\n';

	out << "\n[system]\n"
	    << "units = " << c.units << '\n'
	    << "mass_ratio = " << num(c.mass_ratio) << '\n'
	    << "potential = " << c.potential << '\n';
	if(c.potential == "ring" || c.potential == "ring_biased") {
		out << "hbar_omega0 = " << num(c.hbar_omega0) << '\n' << "v0 = " << num(c.v0) << '\n' << "width = " << num(c.width) << '\n';
	}
	if(c.potential == "ring_biased") out << "bias = " << num(c.bias) << '\n' << "bias_direction = " << pair(c.bias_direction) << '\n';
	if(c.potential == "dimer_chain") {
		out << "dimers = " << c.dimers << '\n' << "bond = " << num(c.bond) << '\n' << "period = " << num(c.period) << '\n'
		    << "nuclear_charge = " << num(c.nuclear_charge) << '\n' << "nuclear_softening = " << num(c.nuclear_softening) << '\n';
	}
	if(c.potential == "tabulated") out << "potential_file = " << c.potential_file << '\n';
	out << "n_up = " << c.n_up << '\n'
	    << "n_down = " << c.n_down << '\n'
	    << "restricted = " << flag(c.restricted) << '\n'
	    << "interaction_softening = " << num(c.interaction_softening) << '\n'
	    << "electron_exchange = " << flag(c.electron_exchange) << '\n';

	for(std::size_t a = 0; a < c.modes.size(); a++) {
		auto const & m = c.modes[a];
		out << "\n[mode." << a + 1 << "]\n"
		    << "omega = " << num(m.omega) << '\n'
		    << "coupling = " << num(m.coupling) << '\n'
		    << "polarization = " << pair(m.polarization) << '\n'
		    << "fock_cutoff = " << m.fock_cutoff << '\n';
	}

	auto const & s = c.scf;
	out << "\n[solver]\n"
	    << "tol_density = " << num(s.tol_density) << '\n'
	    << "tol_S = " << num(s.tol_S) << '\n'
	    << "max_outer = " << s.max_outer << '\n'
	    << "min_outer = " << s.min_outer << '\n'
	    << "mixing = " << num(s.mixing) << '\n';
	if(c.kli_mixing) out << "kli_mixing = " << num(*c.kli_mixing) << '\n';
	if(c.kli_tol_S) out << "kli_tol_S = " << num(*c.kli_tol_S) << '\n';
	out << "step_c = " << num(s.c) << '\n'
	    << "inner = " << to_string(s.inner) << '\n'
	    << "inner_steps = " << s.inner_steps << '\n'
	    << "symmetry_break = " << num(s.symmetry_break) << '\n'
	    << "eig_tol = " << num(s.eig_tol) << '\n'
	    << "eig_max_iter = " << s.eig_max_iter << '\n'
	    << "stern_tol = " << num(s.stern_tol) << '\n'
	    << "stern_max_iter = " << s.stern_max_iter << '\n'
	    << "energy_window = " << num(s.energy_window) << '\n'
	    << "exact_tol = " << num(c.exact.tol) << '\n'
	    << "exact_max_iter = " << c.exact.max_iter << '\n'
	    << "exact_parity = " << flag(c.exact.use_parity) << '\n'
	    << "exact_check_cutoff = " << flag(c.exact.check_cutoff) << '\n';

	if(c.mode == run_mode::sweep) {
		std::vector<std::string> values;
		for(auto v : c.sweep_values) values.push_back(num(v));
		out << "\n[sweep]\n"
		    << "parameter = " << c.sweep_parameter << '\n'
		    << "values = " << detail::join(values) << '\n'
		    << "mode = " << to_string(c.sweep_mode) << '\n';
	}
	return out.str();
}

// 16 hex digits of the FNV-1a hash of the canonical echo
inline std::string config_hash(run_config const & c) {
	char buffer[17];
	std::snprintf(buffer, sizeof(buffer), "%016llx", (unsigned long long) detail::fnv1a(echo_config(c)));
	return buffer;
}

}

#endif
