#include <qedoep/realspace/field_io.hpp>
#include <qedoep/realspace/kinetic_preconditioner.hpp>
#include <qedoep/realspace/laplacian.hpp>
#include <qedoep/realspace/soft_coulomb.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

using namespace qedoep;

TEST(Grid, PointsAreCentredOnTheOrigin) {
	auto mesh = grid::plane(127, 0.7052);
	EXPECT_EQ(mesh.size(), 127u*127u);
	auto centre = mesh.point(mesh.index(63, 63));
	EXPECT_DOUBLE_EQ(centre[0], 0.0);
	EXPECT_DOUBLE_EQ(centre[1], 0.0);
	EXPECT_NEAR(mesh.point(mesh.index(0, 0))[0], -63*0.7052, 1e-12);
	EXPECT_DOUBLE_EQ(mesh.cell_volume(), 0.7052*0.7052);
}

TEST(Grid, MirrorMapsRToMinusR) {
	auto mesh = grid::plane(8, 0.5);
	for(std::size_t ip = 0; ip < mesh.size(); ip++) {
		auto r = mesh.point(ip);
		auto m = mesh.point(mesh.mirror(ip));
		EXPECT_DOUBLE_EQ(r[0], -m[0]);
		EXPECT_DOUBLE_EQ(r[1], -m[1]);
	}
}

TEST(Grid, RejectsInvalidShapes) {
	EXPECT_THROW(grid(3, {4, 4}, {1.0, 1.0}), std::invalid_argument);
	EXPECT_THROW(grid::line(2, 1.0), std::invalid_argument);
	EXPECT_THROW(grid::plane(10, 0.0), std::invalid_argument);
	EXPECT_THROW(grid::plane(10, -1.0), std::invalid_argument);
}

TEST(Field, InnerProductNormAndNormalize) {
	auto mesh = grid::line(101, 0.1);
	auto f = field::from_function(mesh, [](auto const & r) { return std::exp(-r[0]*r[0]); });
	// int exp(-2x^2) = sqrt(pi/2)
	EXPECT_NEAR(inner_product(f, f), std::sqrt(std::numbers::pi/2.0), 1e-10);
	normalize(f);
	EXPECT_NEAR(norm(f), 1.0, 1e-14);
	EXPECT_THROW(inner_product(f, field(grid::line(100, 0.1))), std::invalid_argument);
	field zero(mesh);
	EXPECT_THROW(normalize(zero), std::domain_error);
}

TEST(Laplacian, SecondOrderSineModesAreExactEigenvectors) {
	auto mesh = grid::line(50, 0.2);
	for(int k : {1, 7, 25}) {
		field f(mesh);
		for(int i = 0; i < 50; i++) f[std::size_t(i)] = std::sin(std::numbers::pi*k*(i + 1)/51.0);
		auto lap = laplacian_apply(f, 2);
		double symbol = stencil_symbol(2, 50, 0.2, k);
		EXPECT_LT(max_abs(lap + symbol*f), 1e-10*symbol);
	}
}

TEST(Laplacian, FourthOrderConvergence) {
	auto error = [](double h) {
		int n = int(std::lround(20.0/h)) + 1;
		auto mesh = grid::line(n, h);
		auto f = field::from_function(mesh, [](auto const & r) { return std::exp(-r[0]*r[0]); });
		auto exact = field::from_function(mesh, [](auto const & r) { return (4.0*r[0]*r[0] - 2.0)*std::exp(-r[0]*r[0]); });
		return max_abs(laplacian_apply(f, 4) - exact);
	};
	double ratio = error(0.2)/error(0.1);
	EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(Laplacian, IsSymmetricWithDirichletWalls) {
	std::mt19937_64 rng(3);
	std::normal_distribution<double> dist;
	auto mesh = grid::plane(12, 0.3);
	field f(mesh), g(mesh);
	for(auto & v : f) v = dist(rng);
	for(auto & v : g) v = dist(rng);
	for(int order : {2, 4, 6, 8}) {
		EXPECT_NEAR(inner_product(f, laplacian_apply(g, order)), inner_product(laplacian_apply(f, order), g), 1e-9);
	}
}

TEST(Laplacian, RejectsUnsupportedOrders) {
	EXPECT_THROW(stencil_weights(3), std::invalid_argument);
	EXPECT_THROW(check_stencil(grid::line(4, 1.0), 8), std::invalid_argument);
}

TEST(KineticPreconditioner, InvertsTheSecondOrderOperator) {
	auto mesh = grid::plane(16, 0.4);
	double kc = 0.5, shift = 0.3;
	kinetic_preconditioner pre(mesh, 2, kc, shift);
	std::mt19937_64 rng(5);
	std::normal_distribution<double> dist;
	field f(mesh);
	for(auto & v : f) v = dist(rng);
	auto af = laplacian_apply(f, 2);
	af *= -kc;
	af.axpy(shift, f);
	field back(mesh);
	pre.apply(af.values(), back.span());
	EXPECT_LT(max_abs(back - f), 1e-10);
}

TEST(KineticPreconditioner, ShiftedApplicationAddsToTheDiagonal) {
	auto mesh = grid::line(40, 0.25);
	kinetic_preconditioner base(mesh, 4, 0.5, 0.1);
	kinetic_preconditioner direct(mesh, 4, 0.5, 0.1 + 2.5);
	field f = field::from_function(mesh, [](auto const & r) { return std::exp(-r[0]*r[0])*(1.0 + r[0]); });
	field a(mesh), b(mesh);
	base.apply_shifted(f.span(), a.span(), 2.5);
	direct.apply(f.values(), b.span());
	EXPECT_LT(max_abs(a - b), 1e-13);
	EXPECT_GT(inner_product(f, a), 0.0);
}

TEST(SoftCoulomb, KernelIsSymmetricAndSoftened) {
	auto mesh = grid::line(30, 0.5);
	auto kernel = soft_coulomb_kernel(mesh, 1.0);
	for(std::size_t i = 0; i < mesh.size(); i++) {
		EXPECT_DOUBLE_EQ(kernel(i, i), 1.0);
		for(std::size_t j = 0; j < mesh.size(); j++) EXPECT_DOUBLE_EQ(kernel(i, j), kernel(j, i));
	}
	EXPECT_THROW(soft_coulomb_kernel(grid::plane(5, 1.0), 1.0), std::invalid_argument);
	EXPECT_THROW(soft_coulomb_kernel(mesh, 0.0), std::invalid_argument);
}

TEST(SoftCoulomb, HartreeOfAPointChargeIsTheKernel) {
	auto mesh = grid::line(41, 0.5);
	field n(mesh);
	n[20] = 1.0/mesh.cell_volume();
	auto vh = hartree_potential(soft_coulomb_kernel(mesh, 1.0), n);
	for(std::size_t i = 0; i < mesh.size(); i++) {
		double x = mesh.point(i)[0];
		EXPECT_NEAR(vh[i], 1.0/std::sqrt(x*x + 1.0), 1e-14);
	}
}

TEST(FieldIo, NumbersRoundTripBitExactly) {
	for(double v : {0.1, -1.0/3.0, 6.02214076e23, std::numeric_limits<double>::denorm_min(), std::numeric_limits<double>::max(), -0.0}) {
		double back = parse_double(format_double(v));
		EXPECT_EQ(std::memcmp(&v, &back, sizeof(double)), 0) << format_double(v);
	}
	EXPECT_THROW(parse_double("1.0x"), std::invalid_argument);
	EXPECT_THROW(parse_double(""), std::invalid_argument);
}

TEST(FieldIo, FieldsRoundTripBitExactly) {
	auto mesh = grid(2, {7, 5}, {0.3, 0.45});
	std::mt19937_64 rng(9);
	std::normal_distribution<double> dist;
	field f(mesh);
	for(auto & v : f) v = dist(rng)*1e-7;
	std::stringstream buffer;
	buffer << "# written by a test\n";
	write_field(buffer, f, "nm^-2");
	auto dump = read_field(buffer);
	EXPECT_EQ(dump.units, "nm^-2");
	ASSERT_EQ(dump.values.mesh(), mesh);
	for(std::size_t ip = 0; ip < mesh.size(); ip++) EXPECT_EQ(dump.values[ip], f[ip]);
}

TEST(FieldIo, RejectsMalformedInput) {
	std::stringstream unknown("ndim=1 points=3 spacing=1 colour=red\n1\n2\n3\n");
	EXPECT_THROW(read_field(unknown), std::runtime_error);
	std::stringstream truncated("ndim=1 points=3 spacing=1 units=none\n1\n2\n");
	EXPECT_THROW(read_field(truncated), std::runtime_error);
}

TEST(Laplacian, ConstantFieldHasZeroInteriorLaplacian) {
	auto mesh = grid::plane(20, 0.5);
	field f(mesh, 3.0);
	auto lap = laplacian_apply(f, 4);
	for(int ix = 2; ix < 18; ix++) {
		for(int iy = 2; iy < 18; iy++) EXPECT_NEAR(lap[mesh.index(ix, iy)], 0.0, 1e-12);
	}
}

TEST(Laplacian, SineConvergesAtTheStencilOrder) {
	// sin(kx) vanishes at both walls of [-L/2 - h, L/2 + h] for k = 2 pi/(L + 2h)
	auto error = [](int n, int order) {
		double length = 10.0, h = length/double(n + 1);
		double k = 2.0*std::numbers::pi/length;
		auto mesh = grid::line(n, h);
		auto f = field::from_function(mesh, [&](auto const & r) { return std::sin(k*r[0]); });
		auto err = laplacian_apply(f, order) + k*k*f;
		// zero padding truncates the wide stencil next to the walls
		double worst = 0.0;
		for(std::size_t ip = 0; ip < mesh.size(); ip++) {
			if(std::abs(mesh.point(ip)[0]) < 2.5) worst = std::max(worst, std::abs(err[ip]));
		}
		return worst;
	};
	for(int order : {2, 4}) {
		double ratio = error(99, order)/error(199, order);
		EXPECT_NEAR(std::log2(ratio), double(order), 0.15) << "order " << order;
	}
}

TEST(Laplacian, TwoDimensionalGaussian) {
	double s = 2.0;
	auto mesh = grid::plane(81, 0.25);
	auto f = field::from_function(mesh, [&](auto const & r) { return std::exp(-(r[0]*r[0] + r[1]*r[1])/(2*s*s)); });
	auto exact = field::from_function(mesh, [&](auto const & r) {
		double r2 = r[0]*r[0] + r[1]*r[1];
		return (r2/(s*s*s*s) - 2.0/(s*s))*std::exp(-r2/(2*s*s));
	});
	EXPECT_LT(max_abs(laplacian_apply(f, 4) - exact), 1e-4);
}

TEST(Laplacian, SymmetryHoldsToRoundoff) {
	auto mesh = grid::plane(30, 0.4);
	auto f = field::from_function(mesh, [](auto const & r) { return std::exp(-0.1*(r[0]*r[0] + 2*r[1]*r[1]))*(1 + r[0]); });
	auto g = field::from_function(mesh, [](auto const & r) { return std::exp(-0.2*(r[0] - 1)*(r[0] - 1) - 0.1*r[1]*r[1]); });
	double a = inner_product(f, laplacian_apply(g, 4));
	double b = inner_product(laplacian_apply(f, 4), g);
	EXPECT_LE(std::abs(a - b), 1e-12*std::abs(a));
}

TEST(Field, UnitFieldIntegratesToTheVolume) {
	auto mesh = grid::plane(10, 0.1);
	field one(mesh, 1.0);
	EXPECT_NEAR(inner_product(one, one), mesh.volume(), 1e-14);
	EXPECT_NEAR(mesh.volume(), 1.0, 1e-14);
	EXPECT_GT(inner_product(one, one), 0.0);
}

TEST(SoftCoulomb, KernelApproachesCoulombAtLongRange) {
	auto mesh = grid::line(2001, 0.5);
	auto kernel = soft_coulomb_kernel(mesh, 1.0);
	double distance = 1000.0;
	EXPECT_NEAR(kernel(0, 2000)*distance, 1.0, 1e-6);
}

TEST(SoftCoulomb, HartreeEnergyMatchesDirectDoubleSum) {
	auto mesh = grid::line(60, 0.4);
	auto n = field::from_function(mesh, [](auto const & r) { return std::exp(-0.5*(r[0] - 1)*(r[0] - 1)); });
	n *= 1.0/integral(n);
	auto vh = hartree_potential(soft_coulomb_kernel(mesh, 1.0), n);
	double direct = 0.0;
	for(std::size_t i = 0; i < mesh.size(); i++) {
		for(std::size_t j = 0; j < mesh.size(); j++) {
			double dx = mesh.point(i)[0] - mesh.point(j)[0];
			direct += n[i]*n[j]/std::sqrt(dx*dx + 1.0);
		}
	}
	direct *= mesh.cell_volume()*mesh.cell_volume();
	EXPECT_NEAR(inner_product(n, vh), direct, 1e-12);
}
