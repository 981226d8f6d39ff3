#ifndef QEDOEP__REALSPACE__LAPLACIAN
#define QEDOEP__REALSPACE__LAPLACIAN

#include <qedoep/realspace/field.hpp>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qedoep {

// Central second-derivative weights c_0..c_{order/2}.
inline std::vector<double> stencil_weights(int order) {
	switch(order) {
	case 2: return {-2.0, 1.0};
	case 4: return {-5.0/2.0, 4.0/3.0, -1.0/12.0};
	case 6: return {-49.0/18.0, 3.0/2.0, -3.0/20.0, 1.0/90.0};
	case 8: return {-205.0/72.0, 8.0/5.0, -1.0/5.0, 8.0/315.0, -1.0/560.0};
	}
	throw std::invalid_argument("laplacian: unsupported stencil order " + std::to_string(order));
}

inline void check_stencil(grid const & mesh, int order) {
	int half = int(stencil_weights(order).size()) - 1;
	for(int d = 0; d < mesh.ndim(); d++) {
		if(mesh.points(d) < half + 1) {
			throw std::invalid_argument("laplacian: grid too small for stencil order " + std::to_string(order));
		}
	}
}

// out = scale * lap(in) with zero values outside the box.
inline void laplacian_apply(grid const & mesh, int order, std::span<double const> in, std::span<double> out, double scale = 1.0) {
	auto weights = stencil_weights(order);
	int half = int(weights.size()) - 1;
	int nx = mesh.points(0);
	int ny = mesh.points(1);

	std::vector<double> wx(weights.size()), wy(weights.size());
	for(std::size_t k = 0; k < weights.size(); k++) {
		wx[k] = scale*weights[k]/(mesh.spacing(0)*mesh.spacing(0));
		wy[k] = mesh.ndim() == 2 ? scale*weights[k]/(mesh.spacing(1)*mesh.spacing(1)) : 0.0;
	}
	double center = wx[0] + wy[0];

	for(int ix = 0; ix < nx; ix++) {
		for(int iy = 0; iy < ny; iy++) {
			auto ip = std::size_t(ix)*ny + iy;
			double acc = center*in[ip];
			for(int k = 1; k <= half; k++) {
				double sum = 0.0;
				if(ix - k >= 0) sum += in[ip - std::size_t(k)*ny];
				if(ix + k < nx) sum += in[ip + std::size_t(k)*ny];
				acc += wx[k]*sum;
			}
			if(mesh.ndim() == 2) {
				for(int k = 1; k <= half; k++) {
					double sum = 0.0;
					if(iy - k >= 0) sum += in[ip - k];
					if(iy + k < ny) sum += in[ip + k];
					acc += wy[k]*sum;
				}
			}
			out[ip] = acc;
		}
	}
}

inline field laplacian_apply(field const & f, int order = 4) {
	check_stencil(f.mesh(), order);
	field result(f.mesh());
	laplacian_apply(f.mesh(), order, f.span(), result.span());
	return result;
}

// Eigenvalue of -d^2/dx^2 (stencil version) for the sine mode k = 1..n of an
// n-point line; exact for order 2, approximate near the walls otherwise.
inline double stencil_symbol(int order, int points, double spacing, int mode) {
	auto weights = stencil_weights(order);
	double theta = std::numbers::pi*double(mode)/double(points + 1);
	double value = weights[0];
	for(std::size_t k = 1; k < weights.size(); k++) value += 2.0*weights[k]*std::cos(double(k)*theta);
	return -value/(spacing*spacing);
}

}

#endif
