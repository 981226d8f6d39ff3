#include <qedoep/cli/driver.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct overrides {
	std::string output;
	std::optional<std::uint64_t> seed;
	int threads = 1;
	bool dense_oracle = false;
};

void add_run_flags(CLI::App & cmd, overrides & o) {
	cmd.add_option("--output,-o", o.output, "Artifact directory (default: run.output, else ./<label>)");
	cmd.add_option("--seed", o.seed, "Random seed for eigensolver start vectors (overrides run.seed)");
	cmd.add_option("--threads", o.threads, "Concurrent worker processes for sweep points")->check(CLI::PositiveNumber);
	cmd.add_flag("--dense-oracle", o.dense_oracle, "Cross-check orbital shifts against a dense sum-over-states reference (small grids only)");
}

qedoep::run_config configure(std::string const & path, overrides const & o) {
	auto cfg = qedoep::load_config(path);
	if(o.seed) cfg.seed = *o.seed;
	if(o.dense_oracle) cfg.dense_oracle = true;
	if(!o.output.empty()) cfg.output = o.output;
	cfg.validate();
	return cfg;
}

qedoep::run_context context(qedoep::run_config const & cfg, overrides const & o) {
	return {cfg.output.empty() ? std::filesystem::path(cfg.label) : std::filesystem::path(cfg.output), &std::cout, o.threads};
}

}

int main(int argc, char ** argv) {
	CLI::App app{"Real-space Kohn-Sham solver for electrons coupled to cavity photons.\n"
	             "Exit status: 0 converged, 1 input error (no artifacts written), 2 not converged."};
	app.require_subcommand(1);

	overrides run_opts, sweep_opts;
	std::string run_path, sweep_path, dir_a, dir_b, report_path;

	auto run = app.add_subcommand("run", "Execute the mode named in the configuration (exact, oep, kli, compare or sweep)");
	run->add_option("config", run_path, "Configuration file")->required();
	add_run_flags(*run, run_opts);

	auto sweep = app.add_subcommand("sweep", "Run every point of the configuration's [sweep] block");
	sweep->add_option("config", sweep_path, "Configuration file")->required();
	add_run_flags(*sweep, sweep_opts);

	auto compare = app.add_subcommand("compare", "Report observable and field differences between two artifact directories (b is the reference)");
	compare->add_option("a", dir_a, "Artifact directory")->required()->check(CLI::ExistingDirectory);
	compare->add_option("b", dir_b, "Reference artifact directory")->required()->check(CLI::ExistingDirectory);
	compare->add_option("--output,-o", report_path, "Write the report to this file instead of standard output");

	try {
		app.parse(argc, argv);
	} catch(CLI::ParseError const & e) {
		int code = app.exit(e);
		return code == 0 ? 0 : qedoep::exit_code::input_error;
	}

	qedoep::run_config cfg;
	qedoep::run_context ctx;
	try {
		if(*compare) {
			auto report = qedoep::compare_dirs(dir_a, dir_b);
			if(report_path.empty()) {
				qedoep::write_comparison(std::cout, report);
			} else {
				std::ofstream out(report_path);
				if(!out) throw qedoep::config_error("cannot write '" + report_path + "'");
				qedoep::write_comparison(out, report);
			}
			return qedoep::exit_code::converged;
		}
		if(*run) {
			cfg = configure(run_path, run_opts);
			ctx = context(cfg, run_opts);
		} else {
			cfg = configure(sweep_path, sweep_opts);
			cfg.mode = qedoep::run_mode::sweep;
			cfg.validate();
			ctx = context(cfg, sweep_opts);
		}
		qedoep::preflight(cfg);
	} catch(std::exception const & e) {
		std::cerr << "error: " << e.what() << '\n';
		return qedoep::exit_code::input_error;
	}

	try {
		return qedoep::run_config_file(cfg, ctx);
	} catch(std::exception const & e) {
		std::cerr << "error: " << e.what() << '\n';
		return qedoep::exit_code::not_converged;
	}
}
