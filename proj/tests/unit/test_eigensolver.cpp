#include <qedoep/eigensolver/eigensolver.hpp>
#include <qedoep/hamiltonian/external_potential.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace qedoep;

namespace {

field harmonic(grid const & mesh) {
	return field::from_function(mesh, [](auto const & r) { return 0.5*r[0]*r[0]; });
}

}

TEST(Lobpcg, HarmonicOscillatorLevels) {
	auto mesh = grid::line(801, 0.025);
	ks_hamiltonian h(harmonic(mesh), unit_system::atomic());
	eigensolver_options opts;
	opts.tol = 1e-10;
	auto states = lowest_states(h, 3, opts);
	ASSERT_TRUE(states.converged);
	EXPECT_NEAR(states.energies[0], 0.5, 1e-6);
	EXPECT_NEAR(states.energies[1], 1.5, 1e-6);
	EXPECT_NEAR(states.energies[2], 2.5, 1e-6);
}

TEST(Lobpcg, ThreePointGridMatchesClosedForm) {
	// order-2 Dirichlet chain: kc (2 - 2 cos(k pi/4))/h^2
	auto mesh = grid::line(3, 0.5);
	ks_hamiltonian h(field(mesh), unit_system::atomic(), 2);
	auto dense = dense_spectrum(h);
	auto iterative = lowest_states(h, 1, {.tol = 1e-12, .guard = 2});
	for(int k = 1; k <= 3; k++) {
		double exact = 0.5*(2.0 - 2.0*std::cos(k*std::numbers::pi/4.0))/0.25;
		EXPECT_NEAR(dense.energies[k - 1], exact, 1e-12);
	}
	EXPECT_NEAR(iterative.energies[0], dense.energies[0], 1e-12);
}

TEST(Lobpcg, AgreesWithDenseSpectrum) {
	auto mesh = grid::plane(20, 0.4);
	auto v = field::from_function(mesh, [](auto const & r) { return 0.5*(r[0]*r[0] + 2.0*r[1]*r[1]) + 0.3*r[0]; });
	ks_hamiltonian h(v, unit_system::atomic());
	auto dense = dense_spectrum(h);
	eigensolver_options opts;
	opts.tol = 1e-11;
	auto states = lowest_states(h, 4, opts);
	for(int i = 0; i < 4; i++) {
		EXPECT_NEAR(states.energies[i], dense.energies[i], 1e-10);
		EXPECT_NEAR(std::abs(inner_product(states.orbitals[i], dense.orbitals[i])), 1.0, 1e-8);
	}
}

TEST(DenseSpectrum, TraceCompletenessAndOrthonormality) {
	auto mesh = grid::line(40, 0.3);
	ks_hamiltonian h(harmonic(mesh), unit_system::atomic());
	field_operator op = [&h](auto in, auto out) { h.apply(in, out); };
	auto matrix = dense_matrix(op, mesh);
	auto dense = dense_spectrum(h);

	double sum = 0.0;
	for(auto e : dense.energies) sum += e;
	EXPECT_NEAR(sum, matrix.trace(), 1e-10*std::abs(matrix.trace()));

	// sum_i phi_i(r) phi_i(r') dV = delta
	for(std::size_t a = 0; a < mesh.size(); a += 7) {
		for(std::size_t b = 0; b < mesh.size(); b += 5) {
			double value = 0.0;
			for(auto const & phi : dense.orbitals) value += phi[a]*phi[b];
			value *= mesh.cell_volume();
			EXPECT_NEAR(value, a == b ? 1.0 : 0.0, 1e-10);
		}
	}
	for(std::size_t i = 0; i < dense.orbitals.size(); i += 3) {
		for(std::size_t j = 0; j < dense.orbitals.size(); j += 4) {
			EXPECT_NEAR(inner_product(dense.orbitals[i], dense.orbitals[j]), i == j ? 1.0 : 0.0, 1e-10);
		}
	}
	for(std::size_t i = 1; i < dense.energies.size(); i++) EXPECT_LE(dense.energies[i - 1], dense.energies[i]);
}

TEST(Lobpcg, RayleighQuotientBoundsTheGroundState) {
	auto mesh = grid::line(101, 0.1);
	ks_hamiltonian h(harmonic(mesh), unit_system::atomic());
	auto states = lowest_states(h, 1, {.tol = 1e-10});
	for(double width : {0.5, 0.8, 1.3, 2.0}) {
		auto trial = field::from_function(mesh, [&](auto const & r) { return std::exp(-r[0]*r[0]/(width*width)) + 0.1*r[0]; });
		normalize(trial);
		EXPECT_GE(inner_product(trial, h(trial)), states.energies[0] - 1e-12);
	}
}

TEST(Lobpcg, FixedSeedIsDeterministic) {
	auto mesh = grid::plane(24, 0.5);
	ks_hamiltonian h(field::from_function(mesh, [](auto const & r) { return 0.5*(r[0]*r[0] + r[1]*r[1]); }), unit_system::atomic());
	eigensolver_options opts;
	opts.seed = 42;
	auto a = lowest_states(h, 3, opts);
	auto b = lowest_states(h, 3, opts);
	for(int i = 0; i < 3; i++) {
		EXPECT_EQ(a.energies[i], b.energies[i]);
		EXPECT_EQ(a.orbitals[i].values(), b.orbitals[i].values());
	}
	EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lobpcg, OrbitalsAreNormalizedWithTheGridMeasure) {
	auto mesh = grid::plane(30, 0.5);
	ks_hamiltonian h(field::from_function(mesh, [](auto const & r) { return 0.5*(r[0]*r[0] + r[1]*r[1]); }), unit_system::atomic());
	auto states = lowest_states(h, 3);
	for(auto const & phi : states.orbitals) EXPECT_NEAR(norm(phi), 1.0, 1e-12);
	EXPECT_NEAR(inner_product(states.orbitals[0], states.orbitals[1]), 0.0, 1e-10);
}

TEST(Lobpcg, RejectsBadBlockSizes) {
	auto mesh = grid::line(5, 0.5);
	ks_hamiltonian h(field(mesh), unit_system::atomic(), 2);
	EXPECT_THROW(lowest_states(h, 0), std::invalid_argument);
	EXPECT_THROW(lowest_states(h, 6), std::invalid_argument);
	EXPECT_THROW(dense_spectrum(ks_hamiltonian(field(grid::plane(70, 0.5)), unit_system::atomic())), std::invalid_argument);
}

TEST(Lobpcg, BareRingExcitationIsNearTheCavityFrequency) {
	auto mesh = grid::plane(127, 0.7052);
	ks_hamiltonian h(build_vext(quantum_ring{}, mesh), unit_system::gaas());
	auto states = lowest_states(h, 3, {.tol = 1e-9});
	ASSERT_TRUE(states.converged);
	// first excited level is the degenerate angular-momentum pair
	EXPECT_NEAR(states.energies[1], states.energies[2], 1e-6);
	EXPECT_NEAR(states.energies[1] - states.energies[0], 1.41, 0.02);
}
