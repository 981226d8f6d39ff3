#ifndef QEDOEP__STERNHEIMER__MINRES
#define QEDOEP__STERNHEIMER__MINRES

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace qedoep {

using vector_map = std::function<void(std::span<double const>, std::span<double>)>;
using vector_projection = std::function<void(std::span<double>)>;

struct minres_report {
	double residual = 0.0;   // true relative residual |b - A x|/|b| of the projected system
	int iterations = 0;
	int restarts = 0;
	bool converged = false;
};

namespace detail {

inline double dot(std::span<double const> a, std::span<double const> b) {
	return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double nrm2(std::span<double const> a) {
	return std::sqrt(dot(a, a));
}

}

// Preconditioned MINRES (Paige-Saunders recurrences) for a symmetric,
// possibly indefinite A on the range of an orthogonal projector Q. The
// preconditioner must be symmetric positive definite; it is applied as QMQ.
// x holds the initial guess and receives the solution.
inline minres_report minres(vector_map const & apply_a, std::span<double const> b, std::span<double> x,
                            vector_map const & precond, vector_projection const & project,
                            double tol, int max_iter, int max_restarts = 4) {
	auto n = b.size();
	std::vector<double> bq(b.begin(), b.end());
	if(project) project(bq);
	if(project) project(x);

	minres_report report;
	double bnorm = detail::nrm2(bq);
	if(bnorm == 0.0) {
		std::fill(x.begin(), x.end(), 0.0);
		report.converged = true;
		return report;
	}

	std::vector<double> r1(n), r2(n), y(n), v(n), w(n, 0.0), w1(n, 0.0), w2(n, 0.0), ax(n);

	auto true_residual = [&]() {
		apply_a(x, ax);
		for(std::size_t i = 0; i < n; i++) r1[i] = bq[i] - ax[i];
		if(project) project(r1);
		return detail::nrm2(r1)/bnorm;
	};

	auto apply_m = [&](std::span<double const> in, std::span<double> out) {
		if(precond) {
			std::vector<double> tmp(in.begin(), in.end());
			if(project) project(tmp);
			precond(tmp, out);
		} else {
			std::copy(in.begin(), in.end(), out.begin());
		}
		if(project) project(out);
	};

	double eps = std::numeric_limits<double>::epsilon();
	report.residual = true_residual();
	double internal_tol = tol;

	while(true) {
		if(report.residual <= tol) {
			report.converged = true;
			return report;
		}
		if(report.iterations >= max_iter || report.restarts > max_restarts) return report;

		// r1 holds the projected residual of the current x
		apply_m(r1, y);
		double beta1 = detail::dot(r1, y);
		if(beta1 <= 0.0) return report;
		beta1 = std::sqrt(beta1);

		double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
		double cs = -1.0, sn = 0.0;
		r2 = r1;
		std::fill(w.begin(), w.end(), 0.0);
		std::fill(w2.begin(), w2.end(), 0.0);
		// stop the recurrence on its own (preconditioned) estimate, then verify
		double target = internal_tol*beta1/report.residual;

		while(report.iterations < max_iter) {
			report.iterations++;
			double s = 1.0/beta;
			for(std::size_t i = 0; i < n; i++) v[i] = s*y[i];
			if(project) project(v);
			apply_a(v, y);
			if(project) project(y);
			if(oldb != 0.0) for(std::size_t i = 0; i < n; i++) y[i] -= (beta/oldb)*r1[i];
			double alfa = detail::dot(v, y);
			for(std::size_t i = 0; i < n; i++) y[i] -= (alfa/beta)*r2[i];
			std::swap(r1, r2);
			r2 = y;
			apply_m(r2, y);
			oldb = beta;
			double beta2 = detail::dot(r2, y);
			if(beta2 < 0.0) break;
			beta = std::sqrt(beta2);

			double oldeps = epsln;
			double delta = cs*dbar + sn*alfa;
			double gbar = sn*dbar - cs*alfa;
			epsln = sn*beta;
			dbar = -cs*beta;
			double gamma = std::max(std::hypot(gbar, beta), eps);
			cs = gbar/gamma;
			sn = beta/gamma;
			double phi = cs*phibar;
			phibar = sn*phibar;

			double denom = 1.0/gamma;
			std::swap(w1, w2);
			std::swap(w2, w);
			for(std::size_t i = 0; i < n; i++) {
				w[i] = (v[i] - oldeps*w1[i] - delta*w2[i])*denom;
				x[i] += phi*w[i];
			}
			if(project) project(x);

			if(phibar <= target || beta == 0.0) break;
		}

		report.residual = true_residual();
		if(report.residual <= tol) continue;
		// the estimate was optimistic; restart tighter from the current iterate
		report.restarts++;
		internal_tol *= std::max(0.5*tol/report.residual, 1e-3);
	}
}

}

#endif
