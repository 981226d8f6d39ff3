#ifndef QEDOEP__REALSPACE__FIELD
#define QEDOEP__REALSPACE__FIELD

#include <qedoep/realspace/grid.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace qedoep {

namespace detail {

template <class Type> struct is_complex : std::false_type {};
template <class Real> struct is_complex<std::complex<Real>> : std::true_type {};

template <class Type>
auto conj(Type const & value) {
	if constexpr(is_complex<Type>::value) return std::conj(value);
	else return value;
}

template <class Type>
double abs2(Type const & value) {
	if constexpr(is_complex<Type>::value) return std::norm(value);
	else return value*value;
}

}

template <class Type>
class basic_field {

	qedoep::grid grid_;
	std::vector<Type> values_;

public:

	using value_type = Type;

	// placeholder on a minimal line; meant to be assigned before use
	basic_field(): basic_field(qedoep::grid::line(3, 1.0)) {
	}

	explicit basic_field(qedoep::grid const & mesh, Type init = Type{}):
		grid_(mesh), values_(mesh.size(), init) {
	}

	basic_field(qedoep::grid const & mesh, std::vector<Type> values):
		grid_(mesh), values_(std::move(values)) {
		if(values_.size() != grid_.size()) throw std::invalid_argument("field: value count does not match grid");
	}

	template <class Function>
	static basic_field from_function(qedoep::grid const & mesh, Function && func) {
		basic_field result(mesh);
		for(std::size_t ip = 0; ip < mesh.size(); ip++) result[ip] = func(mesh.point(ip));
		return result;
	}

	qedoep::grid const & mesh() const { return grid_; }
	std::size_t size() const { return values_.size(); }

	Type & operator[](std::size_t ip) { return values_[ip]; }
	Type const & operator[](std::size_t ip) const { return values_[ip]; }

	Type * data() { return values_.data(); }
	Type const * data() const { return values_.data(); }

	std::span<Type> span() { return values_; }
	std::span<Type const> span() const { return values_; }

	std::vector<Type> const & values() const { return values_; }

	auto begin() { return values_.begin(); }
	auto end() { return values_.end(); }
	auto begin() const { return values_.begin(); }
	auto end() const { return values_.end(); }

	void fill(Type value) { std::fill(values_.begin(), values_.end(), value); }

	basic_field & operator+=(basic_field const & other) {
		check_same_grid(grid_, other.grid_, "field +=");
		for(std::size_t ip = 0; ip < size(); ip++) values_[ip] += other.values_[ip];
		return *this;
	}

	basic_field & operator-=(basic_field const & other) {
		check_same_grid(grid_, other.grid_, "field -=");
		for(std::size_t ip = 0; ip < size(); ip++) values_[ip] -= other.values_[ip];
		return *this;
	}

	basic_field & operator*=(Type scale) {
		for(auto & value : values_) value *= scale;
		return *this;
	}

	// this += scale*other
	basic_field & axpy(Type scale, basic_field const & other) {
		check_same_grid(grid_, other.grid_, "field axpy");
		for(std::size_t ip = 0; ip < size(); ip++) values_[ip] += scale*other.values_[ip];
		return *this;
	}

	friend basic_field operator+(basic_field lhs, basic_field const & rhs) { return lhs += rhs; }
	friend basic_field operator-(basic_field lhs, basic_field const & rhs) { return lhs -= rhs; }
	friend basic_field operator*(Type scale, basic_field rhs) { return rhs *= scale; }
	friend basic_field operator*(basic_field lhs, Type scale) { return lhs *= scale; }

	// pointwise product
	friend basic_field operator*(basic_field lhs, basic_field const & rhs) {
		check_same_grid(lhs.grid_, rhs.grid_, "field product");
		for(std::size_t ip = 0; ip < lhs.size(); ip++) lhs.values_[ip] *= rhs.values_[ip];
		return lhs;
	}

};

using field = basic_field<double>;
using complex_field = basic_field<std::complex<double>>;

// <f|g> = sum conj(f) g dV
template <class Type>
Type inner_product(basic_field<Type> const & f, basic_field<Type> const & g) {
	check_same_grid(f.mesh(), g.mesh(), "inner_product");
	Type sum{};
	for(std::size_t ip = 0; ip < f.size(); ip++) sum += detail::conj(f[ip])*g[ip];
	return sum*f.mesh().cell_volume();
}

// <f|w|g> for a real weight w
template <class Type>
Type inner_product(basic_field<Type> const & f, field const & weight, basic_field<Type> const & g) {
	check_same_grid(f.mesh(), g.mesh(), "inner_product");
	check_same_grid(f.mesh(), weight.mesh(), "inner_product");
	Type sum{};
	for(std::size_t ip = 0; ip < f.size(); ip++) sum += detail::conj(f[ip])*weight[ip]*g[ip];
	return sum*f.mesh().cell_volume();
}

template <class Type>
double norm(basic_field<Type> const & f) {
	double sum = 0.0;
	for(auto const & value : f) sum += detail::abs2(value);
	return std::sqrt(sum*f.mesh().cell_volume());
}

template <class Type>
double max_abs(basic_field<Type> const & f) {
	double result = 0.0;
	for(auto const & value : f) result = std::max(result, std::abs(value));
	return result;
}

template <class Type>
double integral_abs(basic_field<Type> const & f) {
	double sum = 0.0;
	for(auto const & value : f) sum += std::abs(value);
	return sum*f.mesh().cell_volume();
}

inline double integral(field const & f) {
	return std::accumulate(f.begin(), f.end(), 0.0)*f.mesh().cell_volume();
}

template <class Type>
void normalize(basic_field<Type> & f) {
	auto nrm = norm(f);
	if(!(nrm > 0.0)) throw std::domain_error("normalize: zero field");
	f *= Type(1.0/nrm);
}

}

#endif
