#ifndef QEDOEP__EIGENSOLVER__EIGENSOLVER
#define QEDOEP__EIGENSOLVER__EIGENSOLVER

#include <qedoep/eigensolver/lobpcg.hpp>
#include <qedoep/hamiltonian/ks_operator.hpp>
#include <qedoep/realspace/kinetic_preconditioner.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qedoep {

// single-vector operator on flat grid arrays
using field_operator = std::function<void(std::span<double const>, std::span<double>)>;

struct eigen_result {
	std::vector<field> orbitals;     // normalized with the grid measure
	std::vector<double> energies;
	std::vector<double> residual_norms;
	int iterations = 0;
	bool converged = true;
};

struct eigensolver_options {
	double tol = 1e-8;
	int max_iter = 2000;
	int guard = 2;
	std::uint64_t seed = 1;
	double precond_shift = 0.0;      // 0 selects a kinetic-scale default
	std::vector<field> initial;      // warm start
	block_map projector;
};

inline constexpr std::size_t dense_limit = 4096;

inline block_operator as_block_operator(field_operator const & op) {
	return [op](Eigen::MatrixXd const & in, Eigen::MatrixXd & out) {
		out.resize(in.rows(), in.cols());
		for(Eigen::Index j = 0; j < in.cols(); j++) {
			op(std::span<double const>(in.col(j).data(), std::size_t(in.rows())), std::span<double>(out.col(j).data(), std::size_t(in.rows())));
		}
	};
}

inline double default_precond_shift(grid const & mesh, double kinetic_coeff) {
	double hmin = mesh.spacing(0);
	if(mesh.ndim() == 2) hmin = std::min(hmin, mesh.spacing(1));
	return 0.05*kinetic_coeff/(hmin*hmin);
}

namespace detail {

inline eigen_result to_fields(grid const & mesh, lobpcg_result const & raw) {
	eigen_result result;
	result.iterations = raw.iterations;
	result.converged = raw.converged;
	double scale = 1.0/std::sqrt(mesh.cell_volume());
	for(Eigen::Index j = 0; j < raw.vectors.cols(); j++) {
		field phi(mesh);
		for(std::size_t ip = 0; ip < mesh.size(); ip++) phi[ip] = scale*raw.vectors(Eigen::Index(ip), j);
		// deterministic sign: largest component positive
		Eigen::Index imax;
		raw.vectors.col(j).cwiseAbs().maxCoeff(&imax);
		if(raw.vectors(imax, j) < 0.0) phi *= -1.0;
		result.orbitals.push_back(std::move(phi));
		result.energies.push_back(raw.values[j]);
		result.residual_norms.push_back(raw.residuals[j]);
	}
	return result;
}

}

// k lowest eigenpairs of a symmetric grid operator; the preconditioner is
// (kinetic_coeff (-lap) + shift)^{-1}
inline eigen_result lowest_states(field_operator const & apply_h, grid const & mesh, int k, double kinetic_coeff, int order, eigensolver_options const & opts = {}) {
	if(k < 1) throw std::invalid_argument("lowest_states: k must be at least 1");
	if(std::size_t(k) > mesh.size()) throw std::invalid_argument("lowest_states: k exceeds the grid size");

	double shift = opts.precond_shift > 0.0 ? opts.precond_shift : default_precond_shift(mesh, kinetic_coeff);
	kinetic_preconditioner precond(mesh, order, kinetic_coeff, shift);

	lobpcg_options lo;
	lo.nev = k;
	lo.guard = opts.guard;
	lo.tol = opts.tol;
	lo.max_iter = opts.max_iter;
	lo.seed = opts.seed;
	lo.projector = opts.projector;
	lo.preconditioner = [&precond, n = mesh.size()](Eigen::MatrixXd & block) {
		std::vector<double> tmp(n);
		for(Eigen::Index j = 0; j < block.cols(); j++) {
			std::span<double> col(block.col(j).data(), n);
			precond.apply(col, tmp);
			std::copy(tmp.begin(), tmp.end(), col.begin());
		}
	};
	if(!opts.initial.empty()) {
		lo.initial.resize(Eigen::Index(mesh.size()), Eigen::Index(opts.initial.size()));
		for(std::size_t j = 0; j < opts.initial.size(); j++) {
			check_same_grid(mesh, opts.initial[j].mesh(), "lowest_states");
			for(std::size_t ip = 0; ip < mesh.size(); ip++) lo.initial(Eigen::Index(ip), Eigen::Index(j)) = opts.initial[j][ip];
		}
	}

	auto raw = lobpcg(as_block_operator(apply_h), Eigen::Index(mesh.size()), lo);
	return detail::to_fields(mesh, raw);
}

inline eigen_result lowest_states(ks_hamiltonian const & h, int k, eigensolver_options const & opts = {}) {
	return lowest_states([&h](auto in, auto out) { h.apply(in, out); }, h.mesh(), k, h.kinetic_coeff(), h.order(), opts);
}

// dense matrix of a grid operator, built column by column
inline Eigen::MatrixXd dense_matrix(field_operator const & apply_h, grid const & mesh) {
	auto n = mesh.size();
	if(n > dense_limit) throw std::invalid_argument("dense_spectrum: grid exceeds the dense limit");
	Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(Eigen::Index(n), Eigen::Index(n));
	std::vector<double> unit(n, 0.0), column(n);
	for(std::size_t j = 0; j < n; j++) {
		unit[j] = 1.0;
		apply_h(unit, column);
		for(std::size_t i = 0; i < n; i++) matrix(Eigen::Index(i), Eigen::Index(j)) = column[i];
		unit[j] = 0.0;
	}
	return 0.5*(matrix + matrix.transpose());
}

inline eigen_result dense_spectrum(field_operator const & apply_h, grid const & mesh) {
	auto matrix = dense_matrix(apply_h, mesh);
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix);
	if(eig.info() != Eigen::Success) throw std::runtime_error("dense_spectrum: diagonalization failed");

	lobpcg_result raw;
	raw.values = eig.eigenvalues();
	raw.vectors = eig.eigenvectors();
	raw.residuals = (matrix*raw.vectors - raw.vectors*raw.values.asDiagonal()).colwise().norm().transpose();
	raw.converged = true;
	return detail::to_fields(mesh, raw);
}

inline eigen_result dense_spectrum(ks_hamiltonian const & h) {
	return dense_spectrum([&h](auto in, auto out) { h.apply(in, out); }, h.mesh());
}

}

#endif
