#ifndef QEDOEP__REALSPACE__SOFT_COULOMB
#define QEDOEP__REALSPACE__SOFT_COULOMB

#include <qedoep/realspace/field.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qedoep {

// w(x, x') = 1/sqrt((x - x')^2 + a^2), tabulated for every pair of a 1D grid.
class interaction_kernel {

	grid grid_;
	double softening_;
	std::vector<double> table_;

public:

	interaction_kernel(grid const & mesh, double softening):
		grid_(mesh), softening_(softening) {

		if(mesh.ndim() != 1) throw std::invalid_argument("soft_coulomb_kernel: only available for 1D grids");
		if(!(softening > 0.0)) throw std::invalid_argument("soft_coulomb_kernel: softening must be positive");

		auto n = mesh.size();
		table_.resize(n*n);
		for(std::size_t i = 0; i < n; i++) {
			for(std::size_t j = 0; j < n; j++) {
				double dx = mesh.point(i)[0] - mesh.point(j)[0];
				table_[i*n + j] = 1.0/std::sqrt(dx*dx + softening*softening);
			}
		}
	}

	grid const & mesh() const { return grid_; }
	double softening() const { return softening_; }

	double operator()(std::size_t i, std::size_t j) const {
		return table_[i*grid_.size() + j];
	}

	// (w * f)(x) = sum_x' w(x, x') f(x') dx
	field convolve(field const & f) const {
		check_same_grid(grid_, f.mesh(), "interaction_kernel::convolve");
		auto n = grid_.size();
		field result(grid_);
		for(std::size_t i = 0; i < n; i++) {
			double sum = 0.0;
			for(std::size_t j = 0; j < n; j++) sum += table_[i*n + j]*f[j];
			result[i] = sum*grid_.cell_volume();
		}
		return result;
	}

};

inline interaction_kernel soft_coulomb_kernel(grid const & mesh, double softening) {
	return interaction_kernel(mesh, softening);
}

inline field hartree_potential(interaction_kernel const & kernel, field const & density) {
	return kernel.convolve(density);
}

}

#endif
