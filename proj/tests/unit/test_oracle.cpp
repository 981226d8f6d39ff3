#include <qedoep/oracle/exact_diag.hpp>
#include <qedoep/oracle/invert.hpp>
#include <qedoep/oracle/sum_over_states.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace qedoep;

namespace {

field lopsided_well(grid const & mesh) {
	return field::from_function(mesh, [](auto const & r) { return 0.15*r[0]*r[0] - 1.0*std::exp(-(r[0] - 0.6)*(r[0] - 0.6)) + 0.05*r[0]; });
}

field even_well(grid const & mesh) {
	return field::from_function(mesh, [](auto const & r) { return 0.15*r[0]*r[0] - 1.0*std::exp(-r[0]*r[0]); });
}

// H = 1 x (h + d^2/2) + w a^dagger a x 1 - sqrt(w/2) (a + a^dagger) x d, assembled densely
Eigen::MatrixXd kronecker_hamiltonian(field const & v, photon_mode const & mode, int order) {
	auto const & mesh = v.mesh();
	ks_hamiltonian h(v, unit_system::atomic(), order);
	auto he = dense_matrix([&h](auto in, auto out) { h.apply(in, out); }, mesh);
	auto n = Eigen::Index(mesh.size());
	auto nf = Eigen::Index(mode.fock_cutoff);
	Eigen::VectorXd d(n);
	for(Eigen::Index ip = 0; ip < n; ip++) d[ip] = mode.project(mesh.point(std::size_t(ip)));
	Eigen::MatrixXd electronic = he;
	electronic.diagonal() += 0.5*d.cwiseAbs2();

	Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n*nf, n*nf);
	double g = std::sqrt(0.5*mode.omega);
	for(Eigen::Index m = 0; m < nf; m++) {
		full.block(m*n, m*n, n, n) = electronic;
		full.block(m*n, m*n, n, n).diagonal().array() += mode.omega*double(m);
		if(m + 1 < nf) {
			full.block(m*n, (m + 1)*n, n, n).diagonal() = -g*std::sqrt(double(m + 1))*d;
			full.block((m + 1)*n, m*n, n, n).diagonal() = -g*std::sqrt(double(m + 1))*d;
		}
	}
	return full;
}

exact_options tight() {
	exact_options o;
	o.tol = 1e-11;
	o.max_iter = 5000;
	return o;
}

}

TEST(ExactDiag, UncoupledLimitIsTheBareGroundState) {
	auto mesh = grid::line(60, 0.25);
	auto v = lopsided_well(mesh);
	auto st = exact_diag(v, unit_system::atomic(), photon_mode{0.7, {0.0, 0.0}, 10}, 4, tight());
	ASSERT_TRUE(st.converged);
	auto bare = dense_spectrum(ks_hamiltonian(v, unit_system::atomic()));
	EXPECT_NEAR(st.energy, bare.energies[0], 1e-10);
	auto ob = exact_observables(st);
	EXPECT_NEAR(ob.n_pt, 0.0, 1e-14);
	EXPECT_NEAR(ob.double_occupancy, 0.0, 1e-14);
	EXPECT_LT(max_abs(ob.density - bare.orbitals[0]*bare.orbitals[0]), 1e-8);
	EXPECT_LT(max_abs(ob.A), 1e-10);
}

TEST(ExactDiag, MatchesDenseKroneckerMatrix) {
	auto mesh = grid::line(21, 0.5);
	photon_mode mode{0.8, {0.3, 0.0}, 12};
	for(auto make : {lopsided_well, even_well}) {
		auto v = make(mesh);
		Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(kronecker_hamiltonian(v, mode, 4));
		auto st = exact_diag(v, unit_system::atomic(), mode, 4, tight());
		ASSERT_TRUE(st.converged);
		EXPECT_NEAR(st.energy, eig.eigenvalues()[0], 1e-9);

		// same vector up to sign, after the grid normalization
		Eigen::VectorXd ref = eig.eigenvectors().col(0)/std::sqrt(mesh.cell_volume());
		double overlap = std::abs(st.vector.dot(ref))*mesh.cell_volume();
		EXPECT_NEAR(overlap, 1.0, 1e-8);
	}
}

TEST(ExactDiag, ParitySplittingFindsTheTrueGroundState) {
	auto mesh = grid::line(31, 0.4);
	auto v = even_well(mesh);
	photon_mode mode{0.5, {0.4, 0.0}, 15};
	auto with = exact_diag(v, unit_system::atomic(), mode, 4, tight());
	auto opts = tight();
	opts.use_parity = false;
	auto without = exact_diag(v, unit_system::atomic(), mode, 4, opts);
	EXPECT_NE(with.parity, 0);
	EXPECT_EQ(without.parity, 0);
	EXPECT_NEAR(with.energy, without.energy, 1e-9);
}

TEST(ExactDiag, WeakCouplingShiftIsTheSecondOrderExchangeEnergy) {
	// E(lambda) - e_0 = E_x + O(lambda^4)
	auto mesh = grid::line(40, 0.35);
	auto v = lopsided_well(mesh);
	auto spectrum = dense_spectrum(ks_hamiltonian(v, unit_system::atomic()));
	for(double coupling : {0.01, 0.02}) {
		photon_mode mode{0.6, {coupling, 0.0}, 8};
		auto st = exact_diag(v, unit_system::atomic(), mode, 4, tight());
		double ex = sum_over_states(spectrum, 1, mode).exchange_energy();
		EXPECT_NEAR((st.energy - spectrum.energies[0])/ex, 1.0, 5e-3) << coupling;
	}
}

TEST(ExactDiag, CutoffCheckReportsASmallShift) {
	auto mesh = grid::line(30, 0.4);
	auto opts = tight();
	opts.check_cutoff = true;
	auto st = exact_diag(lopsided_well(mesh), unit_system::atomic(), photon_mode{0.6, {0.1, 0.0}, 12}, 4, opts);
	ASSERT_TRUE(st.cutoff_shift.has_value());
	EXPECT_LT(*st.cutoff_shift, 1e-10);
	EXPECT_TRUE(st.cutoff_converged);
	EXPECT_LT(st.top_weight, 1e-12);
}

TEST(ExactObservables, NormalizationAndDensityCharge) {
	auto mesh = grid::line(30, 0.4);
	auto st = exact_diag(lopsided_well(mesh), unit_system::atomic(), photon_mode{0.6, {0.3, 0.0}, 20}, 4, tight());
	auto ob = exact_observables(st);
	double total = 0.0;
	for(auto w : ob.fock_weights) total += w;
	EXPECT_NEAR(total, 1.0, 1e-12);
	EXPECT_NEAR(integral(ob.density), 1.0, 1e-12);
	EXPECT_GT(ob.n_pt, 0.0);
	EXPECT_GE(ob.double_occupancy, 0.0);
}

TEST(SumOverStates, ExchangeDerivativeMatchesFiniteDifferences) {
	auto mesh = grid::line(16, 0.5);
	auto v = lopsided_well(mesh);
	photon_mode mode{0.6, {0.2, 0.0}, 41};
	auto make_h = [](field const & vs) { return ks_hamiltonian(vs, unit_system::atomic()); };
	for(int nocc : {1, 2}) {
		sum_over_states sos(dense_spectrum(make_h(v)), nocc, mode);
		auto analytic = sos.exchange_derivative();
		auto numeric = finite_difference_exchange_derivative(make_h, v, nocc, mode, 1e-5);
		EXPECT_LT(max_abs(analytic - numeric), 1e-6*max_abs(analytic)) << nocc;
	}
}

TEST(SumOverStates, ResponseIsNegativeSemidefiniteAndAnnihilatesConstants) {
	auto mesh = grid::line(20, 0.5);
	auto spectrum = dense_spectrum(ks_hamiltonian(lopsided_well(mesh), unit_system::atomic()));
	auto chi = sum_over_states(spectrum, 2, photon_mode{0.6, {0.2, 0.0}, 41}).response();
	EXPECT_LT((chi*Eigen::VectorXd::Ones(chi.rows())).cwiseAbs().maxCoeff(), 1e-10*chi.cwiseAbs().maxCoeff());
	Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(chi);
	EXPECT_LT(eig.eigenvalues().maxCoeff(), 1e-10*chi.cwiseAbs().maxCoeff());
	EXPECT_THROW(sum_over_states(spectrum, 0, photon_mode{}), std::invalid_argument);
}

TEST(Inversion, SingleOrbitalFormulaRecoversThePotential) {
	auto mesh = grid::line(80, 0.2);
	auto v = lopsided_well(mesh);
	auto ground = lowest_states(ks_hamiltonian(v, unit_system::atomic()), 1, {.tol = 1e-12});
	auto n = ground.orbitals[0]*ground.orbitals[0];
	auto vs = single_orbital_potential(n, unit_system::atomic(), 4, ground.energies[0]);
	// where the density is appreciable
	for(std::size_t ip = 20; ip < 60; ip++) EXPECT_NEAR(vs[ip], v[ip], 1e-6) << ip;
}

TEST(Inversion, IterativeInversionRecoversThePotential) {
	auto mesh = grid::line(60, 0.25);
	auto v = lopsided_well(mesh);
	auto ground = dense_spectrum(ks_hamiltonian(v, unit_system::atomic()));
	auto n = ground.orbitals[0]*ground.orbitals[0];
	auto start = field::from_function(mesh, [](auto const & r) { return 0.15*r[0]*r[0]; });
	inversion_options opts;
	opts.tol = 1e-9;
	opts.max_iter = 20000;
	auto res = invert_vxc(n, start, unit_system::atomic(), 4, 0, nullptr, opts);
	ASSERT_TRUE(res.converged) << res.residual;
	// v_s = v + const in the bulk
	double c = res.v_s[30] - v[30];
	for(std::size_t ip = 18; ip < 42; ip++) EXPECT_NEAR(res.v_s[ip] - c, v[ip], 1e-4) << ip;
	EXPECT_THROW(invert_vxc(field(mesh, -1.0), start, unit_system::atomic()), std::invalid_argument);
}
