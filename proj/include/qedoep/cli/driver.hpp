#ifndef QEDOEP__CLI__DRIVER
#define QEDOEP__CLI__DRIVER

#include <qedoep/cli/run_config.hpp>
#include <qedoep/observables/observables.hpp>
#include <qedoep/oracle/sum_over_states.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

namespace exit_code {
inline constexpr int converged = 0;
inline constexpr int input_error = 1;
inline constexpr int not_converged = 2;
}

struct run_context {
	std::filesystem::path output;
	std::ostream * progress = nullptr;
	int workers = 1;
};

namespace detail {

inline void write_text(std::filesystem::path const & path, std::string const & text) {
	std::ofstream out(path);
	if(!out) throw std::runtime_error("cannot write '" + path.string() + "'");
	out << text;
}

inline void dump_field(std::filesystem::path const & dir, std::string const & name, field const & f, std::string const & units, std::string const & hash) {
	std::ofstream out(dir/(name + ".field"));
	if(!out) throw std::runtime_error("cannot write field '" + name + "'");
	out << "# config_hash = " << hash << '\n';
	write_field(out, f, units);
}

inline bool wants(run_config const & cfg, std::string const & name) {
	return std::find(cfg.fields.begin(), cfg.fields.end(), name) != cfg.fields.end();
}

inline observables_record stamped(run_config const & cfg, observables_record const & body) {
	observables_record rec;
	rec.set("config_hash", config_hash(cfg));
	rec.set("label", cfg.label);
	for(auto const & [key, value] : body.entries()) rec.set(key, value);
	return rec;
}

inline void start_artifacts(run_config const & cfg, std::filesystem::path const & dir) {
	std::filesystem::create_directories(dir);
	write_text(dir/"config.echo", "# config_hash = " + config_hash(cfg) + "\n" + echo_config(cfg));
}

// small-grid cross-check of the Sternheimer shifts against a dense spectrum
inline void dense_oracle_checks(ks_state const & st, std::vector<photon_mode> const & modes, observables_record & rec) {
	auto const & ch = st.channels.at(0);
	auto ks = st.system(0);
	auto spectrum = dense_spectrum(ks.hamiltonian);
	for(std::size_t a = 0; a < modes.size(); a++) {
		if(!modes[a].coupled()) continue;
		sum_over_states sos(spectrum, ch.occupied, modes[a]);
		double worst = 0.0;
		for(int i = 0; i < ch.occupied; i++) worst = std::max(worst, max_abs(sos.phi1(i) - ch.shifts.phi1[std::size_t(i)][a]));
		auto tag = std::to_string(a);
		rec.set("oracle_phi1_max_error_" + tag, worst);
		rec.set("oracle_E_x_photon_" + tag, ch.occupancy*sos.exchange_energy());
	}
}

}

inline int run_exact(run_config const & cfg, run_context const & ctx) {
	auto hash = config_hash(cfg);
	detail::start_artifacts(cfg, ctx.output);
	auto problem = cfg.problem(photon_method::none);
	auto t0 = std::chrono::steady_clock::now();
	auto state = exact_diag(problem.potential, problem.mesh, problem.units, problem.modes.at(0), problem.stencil_order, cfg.exact_for());
	double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	auto ob = exact_observables(state);
	auto rec = detail::stamped(cfg, exact_record(state, ob));
	save_record((ctx.output/"observables.txt").string(), rec);

	std::ostringstream log;
	log << "# config_hash = " << hash << '\n'
	    << "iterations\tresidual\tconverged\twall\n"
	    << state.iterations << '\t' << format_double(state.residual) << '\t' << (state.converged ? "true" : "false") << '\t' << format_double(wall) << '\n';
	detail::write_text(ctx.output/"log.tsv", log.str());

	auto length = problem.units.length_unit;
	if(detail::wants(cfg, "density")) detail::dump_field(ctx.output, "density", ob.density, length + "^-" + std::to_string(problem.mesh.ndim()), hash);
	if(detail::wants(cfg, "A")) detail::dump_field(ctx.output, "A_0", ob.A, length + "^-" + std::to_string(problem.mesh.ndim()), hash);
	if(ctx.progress) *ctx.progress << cfg.label << " exact: E = " << format_double(ob.energy) << " n_pt = " << format_double(ob.n_pt) << '\n';
	return state.converged ? exit_code::converged : exit_code::not_converged;
}

inline int run_scf(run_config const & cfg, photon_method method, run_context const & ctx) {
	auto hash = config_hash(cfg);
	detail::start_artifacts(cfg, ctx.output);
	auto problem = cfg.problem(method);
	auto opts = cfg.scf_for(method);

	std::ofstream log(ctx.output/"log.tsv");
	log << "# config_hash = " << hash << '\n';
	write_log_header(log, problem.modes.size());
	auto name = to_string(method);
	auto on_iteration = [&](iteration_record const & rec, ks_state const &) {
		write_log_record(log, rec);
		log.flush();
		if(ctx.progress) {
			*ctx.progress << cfg.label << ' ' << name << " iter " << rec.iter << ": E = " << format_double(rec.e_tot)
			              << " max_S = " << format_double(rec.max_S) << " dn = " << format_double(rec.density_change) << '\n';
		}
	};

	std::optional<ground_state_result> outcome;
	try {
		outcome.emplace(run_ground_state(problem, opts, std::nullopt, {}, on_iteration));
	} catch(scf_error const & e) {
		std::cerr << cfg.label << ": " << e.what() << '\n';
		return exit_code::not_converged;
	}
	auto const & result = *outcome;

	auto body = energies_and_gaps(problem, result);
	if(!result.converged) body.set("diagnostic", result.diagnostic);
	if(cfg.dense_oracle) detail::dense_oracle_checks(result.state, problem.modes, body);
	save_record((ctx.output/"observables.txt").string(), detail::stamped(cfg, body));

	auto const & st = result.state;
	auto length = problem.units.length_unit;
	auto energy = problem.units.energy_unit;
	auto density_units = length + "^-" + std::to_string(problem.mesh.ndim());
	if(detail::wants(cfg, "density")) detail::dump_field(ctx.output, "density", st.density, density_units, hash);
	if(detail::wants(cfg, "v_x")) detail::dump_field(ctx.output, "v_x", st.channels[0].v_x_electron + st.channels[0].v_x_photon, energy, hash);
	if(detail::wants(cfg, "v_s")) detail::dump_field(ctx.output, "v_s", st.v_s(0), energy, hash);
	if(detail::wants(cfg, "A")) {
		for(std::size_t a = 0; a < problem.modes.size(); a++) {
			detail::dump_field(ctx.output, "A_" + std::to_string(a), correlation_A(st, problem.modes, a), density_units, hash);
		}
	}
	if(!result.converged) std::cerr << cfg.label << ' ' << name << ": " << result.diagnostic << '\n';
	return result.converged ? exit_code::converged : exit_code::not_converged;
}

// Per-observable and per-field differences between two artifact directories;
// `b` is the reference for relative deltas.
struct comparison {
	struct value_delta {
		std::string key;
		double a = 0.0;
		double b = 0.0;
		double absolute = 0.0;
		double relative = 0.0;
	};
	struct field_delta {
		std::string name;
		double l1 = 0.0;
		double linf = 0.0;
		double peak = 0.0;   // max |b|
	};
	std::vector<value_delta> values;
	std::vector<std::pair<std::string, std::pair<std::string, std::string>>> text;
	std::vector<field_delta> fields;

	double max_absolute() const {
		double m = 0.0;
		for(auto const & v : values) m = std::max(m, v.absolute);
		for(auto const & f : fields) m = std::max(m, f.linf);
		return m;
	}
};

inline comparison compare_dirs(std::filesystem::path const & dir_a, std::filesystem::path const & dir_b) {
	comparison report;
	auto rec_a = load_record((dir_a/"observables.txt").string());
	auto rec_b = load_record((dir_b/"observables.txt").string());
	for(auto const & [key, value] : rec_a.entries()) {
		if(!rec_b.has(key)) continue;
		if(key == "config_hash" || key == "label") continue;
		if(rec_a.is_number(key) && rec_b.is_number(key)) {
			double a = rec_a.number(key), b = rec_b.number(key);
			double d = std::abs(a - b);
			report.values.push_back({key, a, b, d, d == 0.0 ? 0.0 : d/std::abs(b)});
		} else if(value != rec_b.text(key)) {
			report.text.push_back({key, {value, rec_b.text(key)}});
		}
	}

	std::vector<std::string> names;
	for(auto const & entry : std::filesystem::directory_iterator(dir_a)) {
		if(entry.path().extension() == ".field" && std::filesystem::exists(dir_b/entry.path().filename())) names.push_back(entry.path().stem().string());
	}
	std::sort(names.begin(), names.end());
	for(auto const & name : names) {
		auto fa = load_field((dir_a/(name + ".field")).string()).values;
		auto fb = load_field((dir_b/(name + ".field")).string()).values;
		if(fa.mesh() != fb.mesh()) throw std::invalid_argument("compare: field '" + name + "' lives on different grids");
		report.fields.push_back({name, integral_abs(fa - fb), max_abs(fa - fb), max_abs(fb)});
	}
	return report;
}

inline void write_comparison(std::ostream & out, comparison const & report) {
	out << "observable\ta\tb\tabs_delta\trel_delta\n";
	for(auto const & v : report.values) {
		out << v.key << '\t' << format_double(v.a) << '\t' << format_double(v.b) << '\t' << format_double(v.absolute) << '\t' << format_double(v.relative) << '\n';
	}
	for(auto const & [key, values] : report.text) out << key << '\t' << values.first << '\t' << values.second << "\t-\t-\n";
	out << "\nfield\tL1_delta\tLinf_delta\tpeak_b\n";
	for(auto const & f : report.fields) out << f.name << '\t' << format_double(f.l1) << '\t' << format_double(f.linf) << '\t' << format_double(f.peak) << '\n';
}

// exact, OEP and KLI runs in sibling directories; without an exact reference
// (several electrons) KLI is compared against OEP
inline int run_compare(run_config const & cfg, run_context const & ctx) {
	detail::start_artifacts(cfg, ctx.output);
	bool exact = cfg.exact_supported();
	std::vector<run_mode> modes{run_mode::oep, run_mode::kli};
	if(exact) modes.insert(modes.begin(), run_mode::exact);
	int worst = exit_code::converged;
	for(auto mode : modes) {
		auto c = cfg;
		c.mode = mode;
		run_context sctx{ctx.output/to_string(mode), ctx.progress, 1};
		int code = mode == run_mode::exact ? run_exact(c, sctx) : run_scf(c, mode == run_mode::oep ? photon_method::oep : photon_method::kli, sctx);
		worst = std::max(worst, code);
	}
	std::ostringstream out;
	out << "# config_hash = " << config_hash(cfg) << '\n';
	auto reference = exact ? std::string("exact") : std::string("oep");
	for(auto mode : modes) {
		auto name = to_string(mode);
		if(name == reference) continue;
		out << "\n## " << name << " vs " << reference << '\n';
		write_comparison(out, compare_dirs(ctx.output/name, ctx.output/reference));
	}
	detail::write_text(ctx.output/"comparison.txt", out.str());
	return worst;
}

inline int run_single(run_config const & cfg, run_context const & ctx) {
	switch(cfg.mode) {
	case run_mode::exact: return run_exact(cfg, ctx);
	case run_mode::oep: return run_scf(cfg, photon_method::oep, ctx);
	case run_mode::kli: return run_scf(cfg, photon_method::kli, ctx);
	case run_mode::compare: return run_compare(cfg, ctx);
	case run_mode::sweep: break;
	}
	throw std::logic_error("run_single: sweep is not a single run");
}

// Each point runs in its own directory; with several workers the points are
// forked into separate processes.
inline int run_sweep(run_config const & cfg, run_context const & ctx) {
	detail::start_artifacts(cfg, ctx.output);
	auto n = cfg.sweep_values.size();
	std::vector<int> codes(n, exit_code::converged);
	auto point_dir = [&](std::size_t k) {
		char name[32];
		std::snprintf(name, sizeof(name), "point_%03zu", k);
		return ctx.output/name;
	};
	auto run_point = [&](std::size_t k) {
		auto c = cfg.at_sweep_point(cfg.sweep_values[k]);
		c.label = cfg.label + "-" + point_dir(k).filename().string();
		try {
			return run_single(c, run_context{point_dir(k), ctx.progress, 1});
		} catch(std::exception const & e) {
			std::cerr << c.label << ": " << e.what() << '\n';
			return exit_code::not_converged;
		}
	};

	if(ctx.workers <= 1) {
		for(std::size_t k = 0; k < n; k++) codes[k] = run_point(k);
	} else {
		std::map<pid_t, std::size_t> running;
		std::size_t next = 0;
		std::cout.flush();
		while(next < n || !running.empty()) {
			while(next < n && int(running.size()) < ctx.workers) {
				pid_t pid = fork();
				if(pid < 0) throw std::runtime_error("sweep: fork failed");
				if(pid == 0) {
					int code = run_point(next);
					std::cout.flush();
					_exit(code);
				}
				running[pid] = next++;
			}
			int status = 0;
			pid_t done = wait(&status);
			if(done < 0) throw std::runtime_error("sweep: wait failed");
			auto it = running.find(done);
			if(it == running.end()) continue;
			codes[it->second] = WIFEXITED(status) ? WEXITSTATUS(status) : exit_code::not_converged;
			running.erase(it);
		}
	}

	// plot-ready table of the scalar observables
	std::vector<std::string> columns{"E_tot", "n_pt_0", "double_occupancy_0", "E_x_photon_0", "gap"};
	std::ostringstream table;
	table << "# config_hash = " << config_hash(cfg) << '\n' << cfg.sweep_parameter;
	for(auto const & col : columns) table << '\t' << col;
	table << "\tconverged\n";
	int worst = exit_code::converged;
	for(std::size_t k = 0; k < n; k++) {
		worst = std::max(worst, codes[k]);
		auto sub = point_dir(k);
		if(cfg.sweep_mode == run_mode::compare) sub /= cfg.exact_supported() ? "exact" : "oep";
		table << format_double(cfg.sweep_values[k]);
		observables_record rec;
		bool have = std::filesystem::exists(sub/"observables.txt");
		if(have) rec = load_record((sub/"observables.txt").string());
		for(auto const & col : columns) table << '\t' << (have && rec.has(col) ? rec.text(col) : "nan");
		table << '\t' << (codes[k] == exit_code::converged ? "true" : "false") << '\n';
	}
	detail::write_text(ctx.output/"sweep.tsv", table.str());
	return worst;
}

// Checks that everything a run needs from the outside world is available,
// so input errors surface before any artifact is written.
inline void preflight(run_config const & cfg) {
	try {
		auto problem = cfg.problem(photon_method::oep);
		build_vext(problem.potential, problem.mesh);
	} catch(std::exception const & e) {
		throw config_error(e.what());
	}
}

inline int run_config_file(run_config const & cfg, run_context const & ctx) {
	preflight(cfg);
	if(cfg.mode == run_mode::sweep) return run_sweep(cfg, ctx);
	return run_single(cfg, ctx);
}

}

#endif
