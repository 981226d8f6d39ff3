#ifndef QEDOEP__REALSPACE__KINETIC_PRECONDITIONER
#define QEDOEP__REALSPACE__KINETIC_PRECONDITIONER

#include <qedoep/realspace/laplacian.hpp>

#include <fftw3.h>

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace qedoep {

// Applies (kinetic_coeff*(-lap) + shift)^{-1} through a type-I sine
// transform, which diagonalizes the Dirichlet Laplacian on the box.
class kinetic_preconditioner {

	struct plan_state {
		fftw_plan plan = nullptr;
		std::vector<double> buffer;
		std::vector<double> inverse_symbol;
		double normalization = 1.0;

		~plan_state() {
			if(plan) fftw_destroy_plan(plan);
		}
	};

	grid grid_;
	std::shared_ptr<plan_state> state_;

public:

	kinetic_preconditioner(grid const & mesh, int order, double kinetic_coeff, double shift):
		grid_(mesh), state_(std::make_shared<plan_state>()) {

		if(!(shift > 0.0)) throw std::invalid_argument("kinetic_preconditioner: shift must be positive");

		auto & st = *state_;
		st.buffer.resize(mesh.size());
		int nx = mesh.points(0);
		int ny = mesh.points(1);

		if(mesh.ndim() == 1) {
			st.plan = fftw_plan_r2r_1d(nx, st.buffer.data(), st.buffer.data(), FFTW_RODFT00, FFTW_ESTIMATE);
			st.normalization = 1.0/(2.0*(nx + 1));
		} else {
			st.plan = fftw_plan_r2r_2d(nx, ny, st.buffer.data(), st.buffer.data(), FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
			st.normalization = 1.0/(4.0*(nx + 1)*(ny + 1));
		}

		st.inverse_symbol.resize(mesh.size());
		for(int ix = 0; ix < nx; ix++) {
			double sx = stencil_symbol(order, nx, mesh.spacing(0), ix + 1);
			for(int iy = 0; iy < ny; iy++) {
				double sy = mesh.ndim() == 2 ? stencil_symbol(order, ny, mesh.spacing(1), iy + 1) : 0.0;
				st.inverse_symbol[mesh.index(ix, iy)] = 1.0/(kinetic_coeff*(sx + sy) + shift);
			}
		}
	}

	grid const & mesh() const { return grid_; }

	void apply(std::span<double const> in, std::span<double> out) const {
		auto & st = *state_;
		std::copy(in.begin(), in.end(), st.buffer.begin());
		fftw_execute(st.plan);
		for(std::size_t ip = 0; ip < st.buffer.size(); ip++) st.buffer[ip] *= st.inverse_symbol[ip]*st.normalization;
		fftw_execute(st.plan);
		std::copy(st.buffer.begin(), st.buffer.end(), out.begin());
	}

	// adds `extra` to the diagonal shift of an already planned transform
	void apply_shifted(std::span<double const> in, std::span<double> out, double extra) const {
		auto & st = *state_;
		std::copy(in.begin(), in.end(), st.buffer.begin());
		fftw_execute(st.plan);
		for(std::size_t ip = 0; ip < st.buffer.size(); ip++) {
			st.buffer[ip] *= st.normalization/(1.0/st.inverse_symbol[ip] + extra);
		}
		fftw_execute(st.plan);
		std::copy(st.buffer.begin(), st.buffer.end(), out.begin());
	}

};

}

#endif
