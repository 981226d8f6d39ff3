#ifndef QEDOEP__EIGENSOLVER__LOBPCG
#define QEDOEP__EIGENSOLVER__LOBPCG

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

namespace qedoep {

// Operators act on blocks of column vectors: out = A*in.
using block_operator = std::function<void(Eigen::MatrixXd const & in, Eigen::MatrixXd & out)>;
// In-place maps on a block (preconditioner, symmetry projector).
using block_map = std::function<void(Eigen::MatrixXd & block)>;

struct lobpcg_options {
	int nev = 1;
	int guard = 2;           // extra block vectors, not checked for convergence
	double tol = 1e-8;       // on |A x - e x| for unit x
	int max_iter = 2000;
	std::uint64_t seed = 1;
	block_map preconditioner;
	block_map projector;
	Eigen::MatrixXd initial; // optional warm start (columns)
};

struct lobpcg_result {
	Eigen::VectorXd values;
	Eigen::MatrixXd vectors;      // Euclidean-orthonormal columns
	Eigen::VectorXd residuals;
	int iterations = 0;
	bool converged = false;
};

namespace detail {

// V <- V - Q (Q^T V), twice for stability, mirrored on AV when tracked
inline void orthogonalize_against(Eigen::MatrixXd & v, Eigen::MatrixXd const & q) {
	if(q.cols() == 0 || v.cols() == 0) return;
	for(int pass = 0; pass < 2; pass++) v -= q*(q.transpose()*v);
}

// orthonormalizes the columns of V via the eigen decomposition of its Gram
// matrix, dropping directions below the relative threshold
inline void svqb(Eigen::MatrixXd & v, double drop = 1e-12) {
	if(v.cols() == 0) return;
	for(int pass = 0; pass < 2; pass++) {
		Eigen::VectorXd scale = v.colwise().norm().transpose();
		for(Eigen::Index j = 0; j < scale.size(); j++) scale[j] = scale[j] > 0.0 ? 1.0/scale[j] : 0.0;
		Eigen::MatrixXd vs = v*scale.asDiagonal();
		Eigen::MatrixXd gram = vs.transpose()*vs;
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
		auto const & ev = eig.eigenvalues();
		double top = ev.maxCoeff();
		std::vector<Eigen::Index> keep;
		for(Eigen::Index j = 0; j < ev.size(); j++) if(ev[j] > drop*top && ev[j] > 0.0) keep.push_back(j);
		Eigen::MatrixXd t(gram.rows(), Eigen::Index(keep.size()));
		for(std::size_t j = 0; j < keep.size(); j++) t.col(Eigen::Index(j)) = eig.eigenvectors().col(keep[j])/std::sqrt(ev[keep[j]]);
		v = vs*t;
	}
}

inline Eigen::MatrixXd random_block(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> dist(0.0, 1.0);
	Eigen::MatrixXd block(rows, cols);
	for(Eigen::Index j = 0; j < cols; j++) {
		for(Eigen::Index i = 0; i < rows; i++) block(i, j) = dist(rng);
	}
	return block;
}

}

// Locally optimal block preconditioned conjugate gradient for the lowest
// eigenpairs of a symmetric operator of dimension n.
inline lobpcg_result lobpcg(block_operator const & apply, Eigen::Index n, lobpcg_options const & opts) {
	if(opts.nev < 1) throw std::invalid_argument("lobpcg: nev must be at least 1");
	if(!(opts.tol > 0.0)) throw std::invalid_argument("lobpcg: tolerance must be positive");

	auto nev = Eigen::Index(opts.nev);
	auto block = std::min<Eigen::Index>(nev + std::max(opts.guard, 0), n);
	if(nev > n) throw std::invalid_argument("lobpcg: more eigenpairs requested than the dimension");

	Eigen::MatrixXd x = detail::random_block(n, block, opts.seed);
	if(opts.initial.size() > 0) {
		if(opts.initial.rows() != n) throw std::invalid_argument("lobpcg: initial block has the wrong dimension");
		auto ncopy = std::min(block, opts.initial.cols());
		x.leftCols(ncopy) = opts.initial.leftCols(ncopy);
	}
	if(opts.projector) opts.projector(x);
	detail::svqb(x);
	if(x.cols() < nev) throw std::runtime_error("lobpcg: initial block is rank deficient");

	Eigen::MatrixXd ax(n, x.cols());
	apply(x, ax);

	// initial Rayleigh-Ritz
	{
		Eigen::MatrixXd h = x.transpose()*ax;
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5*(h + h.transpose()));
		x = x*eig.eigenvectors();
		ax = ax*eig.eigenvectors();
	}

	Eigen::MatrixXd p(n, 0), ap(n, 0);
	lobpcg_result result;
	result.values.resize(nev);
	result.residuals = Eigen::VectorXd::Constant(nev, INFINITY);

	bool exact_ax = true;
	for(int iter = 0; iter <= opts.max_iter; iter++) {
		if(!exact_ax && iter%10 == 0) {
			apply(x, ax);
			exact_ax = true;
		}
		Eigen::VectorXd theta = (x.transpose()*ax).diagonal();
		Eigen::MatrixXd r = ax - x*theta.asDiagonal();
		Eigen::VectorXd rnorm = r.colwise().norm().transpose();

		result.iterations = iter;
		result.values = theta.head(nev);
		result.residuals = rnorm.head(nev);
		result.vectors = x.leftCols(nev);
		if(rnorm.head(nev).maxCoeff() <= opts.tol) {
			if(exact_ax) {
				result.converged = true;
				break;
			}
			apply(x, ax);
			exact_ax = true;
			iter--;
			continue;
		}
		if(iter == opts.max_iter) break;

		std::vector<Eigen::Index> active;
		for(Eigen::Index j = 0; j < x.cols(); j++) if(rnorm[j] > 0.1*opts.tol) active.push_back(j);
		Eigen::MatrixXd w(n, Eigen::Index(active.size()));
		for(std::size_t j = 0; j < active.size(); j++) w.col(Eigen::Index(j)) = r.col(active[j]);

		if(opts.preconditioner) opts.preconditioner(w);
		if(opts.projector) opts.projector(w);
		detail::orthogonalize_against(w, x);
		detail::svqb(w);

		if(p.cols() > 0) {
			if(opts.projector) opts.projector(p);
			detail::orthogonalize_against(p, x);
			detail::orthogonalize_against(p, w);
			detail::svqb(p);
			detail::orthogonalize_against(p, w);
			detail::svqb(p);
		}

		Eigen::MatrixXd aw(n, w.cols());
		if(w.cols() > 0) apply(w, aw);
		ap.resize(n, p.cols());
		if(p.cols() > 0) apply(p, ap);

		auto nx = x.cols(), nw = w.cols(), np = p.cols();
		Eigen::MatrixXd s(n, nx + nw + np), as(n, nx + nw + np);
		s << x, w, p;
		as << ax, aw, ap;

		Eigen::MatrixXd gram = s.transpose()*s;
		Eigen::MatrixXd h = s.transpose()*as;
		h = 0.5*(h + h.transpose());
		gram = 0.5*(gram + gram.transpose());

		// basis is orthonormal up to rounding; solve the generalized problem to absorb it
		Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(h, gram);
		if(eig.info() != Eigen::Success) throw std::runtime_error("lobpcg: Rayleigh-Ritz failed");
		Eigen::MatrixXd c = eig.eigenvectors().leftCols(nx);

		p = s.rightCols(nw + np)*c.bottomRows(nw + np);
		x = s*c;
		ax = as*c;
		exact_ax = false;
	}

	return result;
}

}

#endif
