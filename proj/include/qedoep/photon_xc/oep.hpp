#ifndef QEDOEP__PHOTON_XC__OEP
#define QEDOEP__PHOTON_XC__OEP

#include <qedoep/photon_xc/exchange.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

// For frozen orbitals the OEP condition is linear in v:
//   S(v) = sum_i 2 (psi_i phi_i - Lambda_i),  (h - e_i) psi_i = Q_i (W_i - v phi_i)
// where W_i is everything in M_i that does not involve v.
struct oep_linear_problem {
	ks_system const * ks = nullptr;
	std::vector<field> source;
	std::vector<field> Lambda;   // empty for the purely electronic part
};

enum class inner_method { richardson, cg };

inline inner_method parse_inner_method(std::string const & name) {
	if(name == "richardson") return inner_method::richardson;
	if(name == "cg") return inner_method::cg;
	throw std::invalid_argument("unknown inner OEP method '" + name + "'");
}

inline std::string to_string(inner_method method) {
	return method == inner_method::cg ? "cg" : "richardson";
}

struct oep_inner_options {
	inner_method method = inner_method::cg;
	double c = 0.1;
	int max_steps = 500;
	double tol_S = 1e-9;
	double psi_tol = 1e-9;
	int psi_max_iter = 0;
};

struct oep_inner_result {
	field vx;
	field S;
	std::vector<field> psi;
	double max_S = 0.0;
	field initial_S;               // at v0, before any update
	std::vector<field> initial_psi;
	int steps = 0;
	int sternheimer_iterations = 0;
	int rejections = 0;
	double c = 0.0;
	bool converged = false;
	bool solves_converged = true;
};

namespace detail {

struct oep_evaluation {
	field S;
	std::vector<field> psi;
};

// S(v) for the affine problem (with_source) or the linear part K v
inline oep_evaluation oep_evaluate(oep_linear_problem const & prob, field const & v, bool with_source,
                                   std::vector<field> const * warm, oep_inner_options const & opts, oep_inner_result & stats) {
	auto const & ks = *prob.ks;
	oep_evaluation out{field(ks.mesh()), {}};
	for(std::size_t i = 0; i < ks.occupied(); i++) {
		field rhs = v*ks.orbitals[i];
		rhs *= -1.0;
		if(with_source) rhs += prob.source[i];
		std::optional<field> guess;
		if(warm && warm->size() == ks.occupied()) guess = (*warm)[i];
		auto res = psi_solve(ks, rhs, i, opts.psi_tol, opts.psi_max_iter, std::move(guess));
		stats.sternheimer_iterations += res.report.iterations;
		stats.solves_converged = stats.solves_converged && res.report.converged;
		out.S.axpy(2.0, res.psi*ks.orbitals[i]);
		if(with_source && !prob.Lambda.empty()) out.S.axpy(-2.0, prob.Lambda[i]);
		out.psi.push_back(std::move(res.psi));
	}
	return out;
}

}

inline oep_inner_result oep_solve_fixed_orbitals(oep_linear_problem const & prob, field const & v0, oep_inner_options const & opts,
                                                 std::vector<field> const * psi_warm = nullptr) {
	if(!prob.ks) throw std::invalid_argument("oep_solve_fixed_orbitals: missing state");
	auto const & ks = *prob.ks;
	if(prob.source.size() != ks.occupied()) throw std::invalid_argument("oep_solve_fixed_orbitals: one source per orbital required");
	if(!prob.Lambda.empty() && prob.Lambda.size() != ks.occupied()) throw std::invalid_argument("oep_solve_fixed_orbitals: one Lambda per orbital required");

	oep_inner_result result;
	result.vx = v0;
	result.c = opts.c;

	auto eval = detail::oep_evaluate(prob, result.vx, true, psi_warm, opts, result);
	result.initial_S = eval.S;
	result.initial_psi = eval.psi;

	if(opts.method == inner_method::richardson) {
		step_control control(opts.c);
		control.accept(max_abs(eval.S));
		field v_accepted = result.vx;
		auto eval_accepted = eval;

		while(max_abs(eval_accepted.S) > opts.tol_S && result.steps < opts.max_steps) {
			result.steps++;
			auto v_trial = update_vx(v_accepted, eval_accepted.S, control.step());
			auto trial = detail::oep_evaluate(prob, v_trial, true, &eval_accepted.psi, opts, result);
			if(control.accept(max_abs(trial.S))) {
				v_accepted = std::move(v_trial);
				eval_accepted = std::move(trial);
			}
		}
		result.vx = std::move(v_accepted);
		eval = std::move(eval_accepted);
		result.rejections = control.rejections();
		result.c = control.step();

	} else {
		// conjugate gradients on K v = b, K = -chi symmetric positive semidefinite
		auto r = eval.S;
		auto p = r;
		double rr = inner_product(r, r);
		std::vector<field> kp_warm;
		while(max_abs(r) > opts.tol_S && result.steps < opts.max_steps) {
			result.steps++;
			auto kp_eval = detail::oep_evaluate(prob, p, false, &kp_warm, opts, result);
			// the linear part returns -K p
			auto kp = kp_eval.S;
			kp *= -1.0;
			kp_warm = std::move(kp_eval.psi);
			double pkp = inner_product(p, kp);
			if(!(pkp > 0.0)) break;
			double alpha = rr/pkp;
			result.vx.axpy(alpha, p);
			r.axpy(-alpha, kp);
			double rr_new = inner_product(r, r);

			if(max_abs(r) <= opts.tol_S || result.steps%25 == 0) {
				// replace the recursive residual by a freshly solved one
				eval = detail::oep_evaluate(prob, result.vx, true, &eval.psi, opts, result);
				r = eval.S;
				rr_new = inner_product(r, r);
				if(max_abs(r) <= opts.tol_S) break;
				p = r;
				rr = rr_new;
				continue;
			}
			p *= rr_new/rr;
			p += r;
			rr = rr_new;
		}
		eval = detail::oep_evaluate(prob, result.vx, true, &eval.psi, opts, result);
	}

	result.S = std::move(eval.S);
	result.psi = std::move(eval.psi);
	result.max_S = max_abs(result.S);
	result.converged = result.max_S <= opts.tol_S;
	return result;
}

struct kli_options {
	double density_floor = 1e-12;   // relative to the maximum density
};

// v = (sum_i vbar_i |phi_i|^2 + sum_i (W_i phi_i - <W_i|phi_i> |phi_i|^2))/n
// with vbar_i = <phi_i|v|phi_i> solved as a linear system and vbar_N = target
inline field kli_solve(ks_system const & ks, std::vector<field> const & source, double target, kli_options const & opts = {}) {
	auto nocc = ks.occupied();
	if(source.size() != nocc) throw std::invalid_argument("kli_solve: one source per orbital required");
	auto const & mesh = ks.mesh();

	field n(mesh);
	for(auto const & phi : ks.orbitals) n += phi*phi;
	double floor = opts.density_floor*max_abs(n);
	for(auto & value : n) value = std::max(value, floor);

	field vs(mesh);
	for(std::size_t i = 0; i < nocc; i++) {
		auto const & phi = ks.orbitals[i];
		double wi = inner_product(source[i], phi);
		for(std::size_t ip = 0; ip < mesh.size(); ip++) vs[ip] += (source[i][ip]*phi[ip] - wi*phi[ip]*phi[ip])/n[ip];
	}

	auto homo = ks.homo();
	Eigen::VectorXd vbar = Eigen::VectorXd::Zero(Eigen::Index(nocc));
	vbar[Eigen::Index(homo)] = target;
	if(nocc > 1) {
		std::vector<std::size_t> rest;
		for(std::size_t i = 0; i < nocc; i++) if(i != homo) rest.push_back(i);
		auto m = Eigen::Index(rest.size());
		Eigen::MatrixXd a(m, m);
		Eigen::VectorXd b(m);
		auto overlap = [&](std::size_t j, std::size_t i) {
			double sum = 0.0;
			for(std::size_t ip = 0; ip < mesh.size(); ip++) {
				auto pj = ks.orbitals[j][ip], pi = ks.orbitals[i][ip];
				sum += pj*pj*pi*pi/n[ip];
			}
			return sum*mesh.cell_volume();
		};
		for(Eigen::Index j = 0; j < m; j++) {
			auto const & phij = ks.orbitals[rest[std::size_t(j)]];
			b[j] = inner_product(phij, vs, phij) + overlap(rest[std::size_t(j)], homo)*target;
			for(Eigen::Index i = 0; i < m; i++) a(j, i) = (i == j ? 1.0 : 0.0) - overlap(rest[std::size_t(j)], rest[std::size_t(i)]);
		}
		Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
		for(Eigen::Index j = 0; j < m; j++) vbar[Eigen::Index(rest[std::size_t(j)])] = x[j];
	}

	field v = vs;
	for(std::size_t i = 0; i < nocc; i++) {
		auto const & phi = ks.orbitals[i];
		for(std::size_t ip = 0; ip < mesh.size(); ip++) v[ip] += vbar[Eigen::Index(i)]*phi[ip]*phi[ip]/n[ip];
	}
	return fix_constant(ks, target, v);
}

inline oep_linear_problem photon_problem(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts) {
	oep_linear_problem prob;
	prob.ks = &ks;
	for(std::size_t i = 0; i < ks.occupied(); i++) {
		prob.source.push_back(photon_source(ks, modes, shifts, i));
		prob.Lambda.push_back(build_Lambda(shifts, ks, i));
	}
	return prob;
}

inline oep_linear_problem electron_problem(ks_system const & ks, interaction_kernel const & kernel) {
	oep_linear_problem prob;
	prob.ks = &ks;
	for(std::size_t i = 0; i < ks.occupied(); i++) prob.source.push_back(fock_apply(ks, kernel, i));
	return prob;
}

// KLI photon exchange potential of one spin channel
inline field kli_solve(ks_system const & ks, std::vector<photon_mode> const & modes, shift_set const & shifts, kli_options const & opts = {}) {
	check_current(shifts, ks, "kli_solve");
	std::vector<field> source;
	for(std::size_t i = 0; i < ks.occupied(); i++) source.push_back(photon_source(ks, modes, shifts, i));
	return kli_solve(ks, source, photon_constant_target(ks, modes, shifts), opts);
}

}

#endif
