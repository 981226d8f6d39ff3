#ifndef QEDOEP__REALSPACE__GRID
#define QEDOEP__REALSPACE__GRID

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace qedoep {

// Uniform 1D or 2D mesh centred on the origin. Points are stored row-major:
// index = ix*ny + iy (ny = 1 in 1D). Every module uses index() / position()
// for the flat layout.
class grid {

	int ndim_;
	std::array<int, 2> points_;
	std::array<double, 2> spacing_;

public:

	grid(int ndim, std::array<int, 2> points, std::array<double, 2> spacing):
		ndim_(ndim), points_(points), spacing_(spacing) {

		if(ndim_ != 1 && ndim_ != 2) throw std::invalid_argument("grid: ndim must be 1 or 2");
		if(ndim_ == 1) {
			points_[1] = 1;
			spacing_[1] = 1.0;
		}
		for(int d = 0; d < ndim_; d++) {
			if(points_[d] < 3) throw std::invalid_argument("grid: at least 3 points per dimension are required");
			if(!(spacing_[d] > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
		}
	}

	static grid line(int points, double spacing) {
		return grid(1, {points, 1}, {spacing, 1.0});
	}

	static grid plane(int points, double spacing) {
		return grid(2, {points, points}, {spacing, spacing});
	}

	int ndim() const { return ndim_; }
	int points(int dim) const { return points_[dim]; }
	double spacing(int dim) const { return spacing_[dim]; }

	std::size_t size() const {
		return std::size_t(points_[0])*std::size_t(points_[1]);
	}

	double cell_volume() const {
		return ndim_ == 1 ? spacing_[0] : spacing_[0]*spacing_[1];
	}

	double volume() const {
		return cell_volume()*double(size());
	}

	std::size_t index(int ix, int iy = 0) const {
		return std::size_t(ix)*std::size_t(points_[1]) + std::size_t(iy);
	}

	std::array<int, 2> position(std::size_t idx) const {
		return {int(idx/std::size_t(points_[1])), int(idx%std::size_t(points_[1]))};
	}

	double coordinate(int dim, int i) const {
		return (double(i) - 0.5*double(points_[dim] - 1))*spacing_[dim];
	}

	std::array<double, 2> point(std::size_t idx) const {
		auto pos = position(idx);
		if(ndim_ == 1) return {coordinate(0, pos[0]), 0.0};
		return {coordinate(0, pos[0]), coordinate(1, pos[1])};
	}

	// index of the point at -r
	std::size_t mirror(std::size_t idx) const {
		auto pos = position(idx);
		if(ndim_ == 1) return index(points_[0] - 1 - pos[0]);
		return index(points_[0] - 1 - pos[0], points_[1] - 1 - pos[1]);
	}

	friend bool operator==(grid const & a, grid const & b) {
		return a.ndim_ == b.ndim_ && a.points_ == b.points_ && a.spacing_ == b.spacing_;
	}

	friend bool operator!=(grid const & a, grid const & b) {
		return !(a == b);
	}

};

inline void check_same_grid(grid const & a, grid const & b, char const * where) {
	if(a != b) throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

}

#endif
