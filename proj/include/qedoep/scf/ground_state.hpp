#ifndef QEDOEP__SCF__GROUND_STATE
#define QEDOEP__SCF__GROUND_STATE

#include <qedoep/scf/ks_state.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

struct iteration_record {
	int iter = 0;
	double e_tot = 0.0;
	double e_x_electron = 0.0;
	std::vector<double> e_x_photon;
	double max_S = 0.0;
	double density_change = 0.0;
	double charge_error = 0.0;
	double wall = 0.0;
};

struct energy_terms {
	double total = 0.0;
	double kinetic = 0.0;
	double external = 0.0;
	double hartree = 0.0;
	double eigenvalue_sum = 0.0;
	xc_breakdown xc;
};

struct ground_state_result {
	ks_state state;
	energy_terms energy;
	std::vector<iteration_record> log;
	bool converged = false;
	std::string diagnostic;
};

struct scf_error : std::runtime_error {
	using std::runtime_error::runtime_error;
};

namespace detail {

inline std::unique_ptr<interaction_kernel> make_kernel(scf_problem const & problem) {
	if(!problem.interaction_softening) return nullptr;
	return std::make_unique<interaction_kernel>(problem.mesh, *problem.interaction_softening);
}

inline field symmetry_seed(scf_problem const & problem, double amplitude) {
	field seed(problem.mesh);
	if(amplitude == 0.0) return seed;
	for(auto const & mode : problem.modes) {
		if(!mode.coupled()) continue;
		double norm = std::hypot(mode.lambda[0], mode.lambda[1]);
		return field::from_function(problem.mesh, [&](auto const & r) {
			return amplitude*(mode.lambda[0]*r[0] + mode.lambda[1]*r[1])/norm;
		});
	}
	return seed;
}

}

inline ks_state initial_state(scf_problem const & problem, scf_options const & opts) {
	problem.validate();
	ks_state st{problem.mesh, problem.units, problem.stencil_order, problem.spin,
	            build_vext(problem.potential, problem.mesh), field(problem.mesh), field(problem.mesh), {}, 0, 0};

	auto add_channel = [&](int nocc, double occupancy) {
		channel_state ch;
		ch.occupancy = occupancy;
		ch.occupied = nocc;
		ch.v_x_electron = field(problem.mesh);
		ch.v_x_photon = detail::symmetry_seed(problem, opts.symmetry_break);
		st.channels.push_back(std::move(ch));
	};
	if(problem.spin.restricted) {
		add_channel(problem.spin.n_up, 2.0);
	} else {
		if(problem.spin.n_up > 0) add_channel(problem.spin.n_up, 1.0);
		if(problem.spin.n_down > 0) add_channel(problem.spin.n_down, 1.0);
	}
	return st;
}

// Total energy from the eigenvalue sum with double-counting corrections;
// kinetic and external parts are evaluated directly as a cross-check.
inline energy_terms assemble_energy(ks_state const & st, std::vector<photon_mode> const & modes, interaction_kernel const * kernel) {
	energy_terms e;
	e.xc.v_x = field(st.mesh);
	e.xc.e_x_photon.assign(modes.size(), 0.0);

	for(std::size_t c = 0; c < st.channels.size(); c++) {
		auto const & ch = st.channels[c];
		auto ks = st.system(c);
		auto xc = exchange_energy(ks, modes, ch.shifts, kernel, ch.occupancy);
		e.xc.e_x_electron += xc.e_x_electron;
		for(std::size_t a = 0; a < modes.size(); a++) e.xc.e_x_photon[a] += xc.e_x_photon[a];

		auto v_dc = st.v_hartree + ch.v_x_electron + ch.v_x_photon;
		for(std::size_t i = 0; i < ch.orbitals.size(); i++) {
			auto const & phi = ch.orbitals[i];
			e.eigenvalue_sum += ch.occupancy*ch.energies[i];
			e.total += ch.occupancy*(ch.energies[i] - inner_product(phi, v_dc, phi));
			auto lap = laplacian_apply(phi, st.stencil_order);
			e.kinetic -= ch.occupancy*st.units.kinetic_coeff*inner_product(phi, lap);
		}
	}
	e.external = inner_product(st.density, st.v_ext);
	if(kernel) e.hartree = 0.5*inner_product(st.density, hartree_potential(*kernel, st.density));
	e.total += e.hartree + e.xc.e_x_electron + e.xc.e_x_photon_total();
	if(!st.channels.empty()) e.xc.v_x = st.channels[0].v_x_electron + st.channels[0].v_x_photon;
	return e;
}

using iteration_callback = std::function<void(iteration_record const &, ks_state const &)>;
// called once the potentials for the next iteration are in place
using commit_callback = std::function<void(ks_state const &, std::vector<iteration_record> const &)>;

// Outer loop: eigensolve -> Phi1 -> energies -> exchange potential update
// (OEP inner solve or KLI) -> Hartree mixing. The reported state carries the
// potentials that produced its orbitals.
inline ground_state_result run_ground_state(scf_problem const & problem, scf_options const & opts,
                                            std::optional<ks_state> start = std::nullopt,
                                            std::vector<iteration_record> history = {},
                                            iteration_callback on_iteration = {}, commit_callback on_commit = {}) {
	problem.validate();
	opts.validate();
	auto kernel = detail::make_kernel(problem);

	ground_state_result result{start ? std::move(*start) : initial_state(problem, opts), {}, std::move(history), false, {}};
	auto & st = result.state;
	check_same_grid(problem.mesh, st.mesh, "run_ground_state");

	bool have_density = integral(st.density) > 0.0;
	auto t0 = std::chrono::steady_clock::now();
	int first = st.iteration;

	for(int iter = first; iter < opts.max_outer; iter++) {
		st.iteration = iter;
		st.revision++;

		// eigensolve every channel
		field density(st.mesh);
		for(std::size_t c = 0; c < st.channels.size(); c++) {
			auto & ch = st.channels[c];
			ks_hamiltonian h(st.v_s(c), st.units, st.stencil_order);
			eigensolver_options eo;
			eo.tol = opts.eig_tol;
			eo.max_iter = opts.eig_max_iter;
			eo.seed = opts.seed + c;
			eo.initial = ch.orbitals;
			auto eig = lowest_states(h, ch.occupied + 1, eo);
			if(!eig.converged) {
				result.diagnostic = "eigensolver did not converge at outer iteration " + std::to_string(iter);
				return result;
			}
			ch.orbitals.assign(eig.orbitals.begin(), eig.orbitals.begin() + ch.occupied);
			ch.energies.assign(eig.energies.begin(), eig.energies.begin() + ch.occupied);
			ch.lumo = eig.energies[std::size_t(ch.occupied)];
			for(auto const & phi : ch.orbitals) density.axpy(ch.occupancy, phi*phi);
		}

		iteration_record rec;
		rec.iter = iter;
		rec.charge_error = std::abs(integral(density) - st.electrons());
		rec.density_change = have_density ? density_residual(density, st.density) : std::numeric_limits<double>::infinity();
		st.density = density;
		have_density = true;

		// orbital shifts and energies at the potentials in use
		bool solves_ok = true;
		for(std::size_t c = 0; c < st.channels.size(); c++) {
			auto & ch = st.channels[c];
			auto ks = st.system(c);
			shift_options so{opts.stern_tol, opts.stern_max_iter};
			auto previous = std::move(ch.shifts);
			ch.shifts = build_shifts(ks, problem.modes, so, &previous);
			solves_ok = solves_ok && ch.shifts.converged;
		}
		result.energy = assemble_energy(st, problem.modes, kernel.get());
		rec.e_tot = result.energy.total;
		rec.e_x_electron = result.energy.xc.e_x_electron;
		rec.e_x_photon = result.energy.xc.e_x_photon;

		// exchange potential updates (not yet committed)
		std::vector<field> next_vxp, next_vxe;
		double worst = 0.0;
		for(std::size_t c = 0; c < st.channels.size(); c++) {
			auto & ch = st.channels[c];
			auto ks = st.system(c);
			auto nocc = ks.occupied();
			ch.shifts.M.assign(nocc, field(st.mesh));
			ch.shifts.psi.assign(nocc, field(st.mesh));
			ch.shifts.Lambda.clear();
			for(std::size_t i = 0; i < nocc; i++) {
				ch.shifts.M[i] = build_M(ks, problem.modes, ch.shifts, ch.v_x_electron + ch.v_x_photon, i, problem.electron_exchange ? kernel.get() : nullptr);
				ch.shifts.Lambda.push_back(build_Lambda(ch.shifts, ks, i));
			}

			bool coupled = std::any_of(problem.modes.begin(), problem.modes.end(), [](auto const & m) { return m.coupled(); });

			auto update = [&](photon_method method, oep_linear_problem const & prob, field const & v_old, double target,
			                  std::vector<field> & warm, double & residual, std::vector<field> & psi_out) {
				if(method == photon_method::oep) {
					oep_inner_options io;
					io.method = opts.inner;
					io.c = opts.c;
					io.max_steps = opts.inner_steps;
					io.tol_S = opts.tol_S;
					io.psi_tol = opts.stern_tol;
					io.psi_max_iter = opts.stern_max_iter;
					auto res = oep_solve_fixed_orbitals(prob, v_old, io, warm.empty() ? nullptr : &warm);
					solves_ok = solves_ok && res.solves_converged;
					residual = max_abs(res.initial_S);
					psi_out = res.initial_psi;
					warm = res.psi;
					auto mixed = v_old;
					mixed.axpy(opts.mixing, fix_constant(ks, target, res.vx) - v_old);
					return mixed;
				}
				auto fresh = kli_solve(ks, prob.source, target);
				residual = max_abs(fresh - v_old);
				auto mixed = v_old;
				mixed.axpy(opts.mixing, fresh - v_old);
				return mixed;
			};

			for(std::size_t i = 0; i < nocc; i++) ch.shifts.psi[i] = field(st.mesh);

			if(coupled && problem.method != photon_method::none) {
				auto prob = photon_problem(ks, problem.modes, ch.shifts);
				std::vector<field> psi_entry;
				next_vxp.push_back(update(problem.method, prob, ch.v_x_photon, photon_constant_target(ks, problem.modes, ch.shifts),
				                          ch.psi_photon, ch.residual_photon, psi_entry));
				for(std::size_t i = 0; i < psi_entry.size(); i++) ch.shifts.psi[i] += psi_entry[i];
			} else {
				next_vxp.push_back(field(st.mesh));
				ch.residual_photon = 0.0;
			}

			if(problem.electron_exchange) {
				auto prob = electron_problem(ks, *kernel);
				// without a photon functional the electronic exchange is still solved as an OEP
				auto method_x = problem.method == photon_method::none ? photon_method::oep : problem.method;
				std::vector<field> psi_entry;
				next_vxe.push_back(update(method_x, prob, ch.v_x_electron, electron_constant_target(ks, *kernel),
				                          ch.psi_electron, ch.residual_electron, psi_entry));
				for(std::size_t i = 0; i < psi_entry.size(); i++) ch.shifts.psi[i] += psi_entry[i];
			} else {
				next_vxe.push_back(field(st.mesh));
				ch.residual_electron = 0.0;
			}
			worst = std::max({worst, ch.residual_photon, ch.residual_electron});
		}
		rec.max_S = worst;
		rec.wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
		result.log.push_back(rec);
		if(on_iteration) on_iteration(rec, st);

		if(rec.charge_error > 1e-8*st.electrons()) {
			result.diagnostic = "charge not conserved at outer iteration " + std::to_string(iter);
			return result;
		}

		// convergence: density, residual, energy window over the last 10 iterations
		std::size_t window = std::min<std::size_t>(10, result.log.size());
		double emin = INFINITY, emax = -INFINITY;
		for(std::size_t k = result.log.size() - window; k < result.log.size(); k++) {
			emin = std::min(emin, result.log[k].e_tot);
			emax = std::max(emax, result.log[k].e_tot);
		}
		bool energy_ok = window < 10 || (emax - emin) <= opts.energy_window*std::abs(rec.e_tot);
		if(iter + 1 - first >= opts.min_outer && rec.density_change < opts.tol_density && worst < opts.tol_S && energy_ok && solves_ok) {
			result.converged = true;
			return result;
		}
		if(iter + 1 == opts.max_outer) break;

		// commit the new potentials
		field vh_new(st.mesh);
		if(kernel) vh_new = hartree_potential(*kernel, st.density);
		st.v_hartree.axpy(opts.mixing, vh_new - st.v_hartree);
		for(std::size_t c = 0; c < st.channels.size(); c++) {
			st.channels[c].v_x_photon = std::move(next_vxp[c]);
			st.channels[c].v_x_electron = std::move(next_vxe[c]);
		}
		st.iteration = iter + 1;
		if(on_commit) on_commit(st, result.log);
	}

	result.diagnostic = "no convergence within " + std::to_string(opts.max_outer) + " outer iterations";
	return result;
}

inline ground_state_result oep_scf(scf_problem problem, scf_options const & opts, std::optional<ks_state> start = std::nullopt) {
	problem.method = photon_method::oep;
	return run_ground_state(problem, opts, std::move(start));
}

inline void write_log_header(std::ostream & out, std::size_t nmodes) {
	out << "iter\te_tot\te_x_electron";
	for(std::size_t a = 0; a < nmodes; a++) out << "\te_x_photon_" << a;
	out << "\tmax_S\tdensity_change\tcharge_error\twall\n";
}

inline void write_log_record(std::ostream & out, iteration_record const & rec) {
	out << rec.iter << '\t' << format_double(rec.e_tot) << '\t' << format_double(rec.e_x_electron);
	for(auto e : rec.e_x_photon) out << '\t' << format_double(e);
	out << '\t' << format_double(rec.max_S) << '\t' << format_double(rec.density_change) << '\t' << format_double(rec.charge_error)
	    << '\t' << format_double(rec.wall) << '\n';
}

}

#endif
