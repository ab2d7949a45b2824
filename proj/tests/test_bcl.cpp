#include <gtest/gtest.h>

#include "clusep/bcl.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace clusep;

namespace {

StateVector e(std::size_t d, std::size_t i) { return StateVector::basis({d}, i); }

MeasurementCoupling qubit_coupling() {
    auto eig = EigenStructure::complete({1.0, -1.0}, {{e(2, 0)}, {e(2, 1)}});
    return build_coupling(std::move(eig), e(2, 0), {e(2, 0), e(2, 1)});
}

double max_diff(const StateVector& a, const StateVector& b) { return max_abs(Vector(a.amplitudes() - b.amplitudes())); }

}  // namespace

TEST(EigenStructure, Validation) {
    EXPECT_THROW(EigenStructure::complete({1.0, 1.0}, {{e(2, 0)}, {e(2, 1)}}), ValidationError);
    EXPECT_THROW(EigenStructure::complete({1.0}, {{e(2, 0)}}), ValidationError);
    EXPECT_THROW(EigenStructure::complete({1.0, 2.0}, {{e(2, 0)}, {e(2, 0)}}), ValidationError);
    EXPECT_THROW(EigenStructure::complete({1.0, 2.0}, {{e(2, 0)}, {}}), ValidationError);
    EXPECT_THROW(EigenStructure::on_subspace({1.0, 2.0, 3.0}, {{e(2, 0)}, {e(2, 1)}, {e(2, 1)}}), ValidationError);
    const auto sub = EigenStructure::on_subspace({1.0}, {{e(3, 2)}});
    EXPECT_FALSE(sub.is_complete());
}

TEST(EigenStructure, FromObservableGroupsDegenerateValues) {
    Rng rng(1);
    const Matrix v = random_unitary(4, rng);
    Vector values(4);
    values << 2.0, -1.0, 2.0, 0.5;
    const Operator o({4}, v * values.asDiagonal() * v.adjoint());
    const auto eig = EigenStructure::from_observable(o);
    EXPECT_EQ(eig.outcome_count(), 3u);
    EXPECT_TRUE(eig.is_complete());
    for (std::size_t k = 0; k < 3; ++k) {
        const double ok = eig.eigenvalues()[k];
        EXPECT_EQ(eig.multiplicity(k), ok > 1.5 ? 2u : 1u);
        for (const auto& vec : eig.eigenvectors()[k])
            EXPECT_LE(max_abs(Vector(o.matrix() * vec.amplitudes() - ok * vec.amplitudes())), 1e-10);
    }
    EXPECT_LE(max_abs(Matrix(eig.domain_projector() - Matrix::Identity(4, 4))), 1e-10);
}

TEST(BuildCoupling, QubitActsAsSpecified) {
    const auto c = qubit_coupling();
    EXPECT_TRUE(c.unitary().is_unitary(1e-10));
    EXPECT_LE(max_diff(c.evolve(e(2, 0)), tensor(e(2, 0), e(2, 0))), 1e-10);
    EXPECT_LE(max_diff(c.evolve(e(2, 1)), tensor(e(2, 1), e(2, 1))), 1e-10);
}

TEST(BuildCoupling, DegenerateGroupWithDistinctPostStates) {
    Rng rng(2);
    const auto post = fixtures::orthonormal_set(3, 2, rng);
    auto eig = EigenStructure::complete({0.0, 1.0}, {{e(3, 0), e(3, 1)}, {e(3, 2)}});
    const auto c = build_coupling(eig, e(2, 0), {e(2, 0), e(2, 1)}, {post, {e(3, 2)}});
    EXPECT_TRUE(c.unitary().is_unitary(1e-10));
    for (std::size_t l = 0; l < 2; ++l)
        EXPECT_LE(max_diff(c.evolve(eig.eigenvectors()[0][l]), tensor(post[l], e(2, 0))), 1e-10);
}

TEST(BuildCoupling, Deterministic) {
    const auto a = fixtures::random_coupling(7, 4, 3, 3);
    const auto b = fixtures::random_coupling(7, 4, 3, 3);
    EXPECT_TRUE(a.coupling.unitary().matrix() == b.coupling.unitary().matrix());
}

TEST(BuildCoupling, ErrorsNameTheViolation) {
    auto eig = EigenStructure::complete({0.0, 1.0}, {{e(3, 0), e(3, 1)}, {e(3, 2)}});
    const auto skew = normalize(e(3, 0) + e(3, 2));
    try {
        build_coupling(eig, e(2, 0), {e(2, 0), e(2, 1)}, {{e(3, 0), skew}, {e(3, 2)}});
        FAIL() << "expected an error";
    } catch (const ValidationError& err) {
        EXPECT_NE(std::string(err.what()).find("(0,0) and (0,1)"), std::string::npos) << err.what();
    }
    EXPECT_THROW(build_coupling(eig, e(2, 0), {e(2, 0), e(2, 0)}), ValidationError);
    EXPECT_THROW(build_coupling(eig, e(2, 0), {e(2, 0)}), ValidationError);
    EXPECT_THROW(build_coupling(eig, StateVector({2}, Vector::Ones(2)), {e(2, 0), e(2, 1)}), ValidationError);
}

TEST(Measure, EigenstateGivesDefiniteResult) {
    const auto f = fixtures::random_coupling(11, 4, 2, 3);
    const auto& eig = f.coupling.eig();
    for (std::size_t k = 0; k < eig.outcome_count(); ++k)
        for (std::size_t l = 0; l < eig.multiplicity(k); ++l) {
            const auto o = measure(f.coupling, eig.eigenvectors()[k][l]);
            EXPECT_NEAR(o.probabilities[k], 1.0, 1e-12);
            for (std::size_t j = 0; j < eig.outcome_count(); ++j)
                if (j != k) {
                    EXPECT_NEAR(o.probabilities[j], 0.0, 1e-12);
                    EXPECT_FALSE(o.collapsed[j].has_value());
                }
            EXPECT_LE(max_diff(o.final_state, tensor(f.coupling.post_states()[k][l], f.coupling.pointers()[k])), 1e-10);
            EXPECT_TRUE(check_objectification(o).condition_a);
        }
}

TEST(Measure, EqualSuperposition) {
    const auto c = qubit_coupling();
    const auto o = measure(c, normalize(e(2, 0) + e(2, 1)));
    EXPECT_NEAR(o.probabilities[0], 0.5, 1e-12);
    EXPECT_NEAR(o.probabilities[1], 0.5, 1e-12);
}

TEST(Measure, RejectsInputOutsideSubspace) {
    auto eig = EigenStructure::on_subspace({0.0, 1.0}, {{e(3, 0)}, {e(3, 1)}});
    const auto c = build_coupling(eig, e(2, 0), {e(2, 0), e(2, 1)});
    EXPECT_NO_THROW(measure(c, normalize(e(3, 0) + e(3, 1))));
    EXPECT_THROW(measure(c, e(3, 2)), ValidationError);
    EXPECT_THROW(measure(c, StateVector({3}, Vector::Ones(3))), ValidationError);
}

TEST(Measure, DualRouteIdentities) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto f = fixtures::random_coupling(seed, 2 + seed % 4, 2 + seed % 2, 2 + seed % 3);
        const auto o = measure(f.coupling, f.input);
        double sum = 0.0;
        for (std::size_t k = 0; k < o.probabilities.size(); ++k) {
            sum += o.probabilities[k];
            const Vector proj = f.coupling.eig().projector(k) * f.input.amplitudes();
            EXPECT_NEAR(o.probabilities[k], proj.squaredNorm(), 1e-12);
        }
        EXPECT_NEAR(sum, 1.0, 1e-10);
        EXPECT_LE(reconstruction_residual(o), 1e-10);
        EXPECT_LE(closed_form_residual(o), 1e-10);

        // Independent reduction of the final state by explicit index sums.
        const Vector& fs = o.final_state.amplitudes();
        const std::size_t d = product(o.system_dims), a = product(o.apparatus_dims);
        const Matrix reduced = oracle::partial_trace(fs * fs.adjoint(), {d, a}, {false, true});
        EXPECT_LE(max_abs(Matrix(reduced - o.apparatus_rho.matrix())), 1e-12);
    }
}

TEST(Measure, CouplingIsLinear) {
    Rng rng(3);
    const auto f = fixtures::random_coupling(5, 4, 2, 2);
    for (int t = 0; t < 10; ++t) {
        const auto x = random_state({4}, rng), y = random_state({4}, rng);
        const Complex a{0.3, -1.2}, b{2.0, 0.5};
        const auto lhs = f.coupling.evolve(x.scaled(a) + y.scaled(b));
        const auto rhs = f.coupling.evolve(x).scaled(a) + f.coupling.evolve(y).scaled(b);
        EXPECT_LE(max_diff(lhs, rhs), 1e-10);
    }
}

TEST(Objectification, FailsForOverlappingBranches) {
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const auto f = fixtures::random_coupling(seed, 4, 2 + seed % 3, 3);
        const auto o = measure(f.coupling, f.input);
        std::size_t live = 0;
        double overlap = 0.0;
        for (std::size_t k = 0; k < o.probabilities.size(); ++k) {
            if (o.probabilities[k] > 1e-12) ++live;
            for (std::size_t l = 0; l < k; ++l)
                if (o.collapsed[k] && o.collapsed[l]) overlap = std::max(overlap, std::abs(o.collapsed[k]->inner(*o.collapsed[l])));
        }
        ASSERT_GE(live, 2u);
        const auto r = check_objectification(o);
        EXPECT_FALSE(r.condition_b);
        EXPECT_FALSE(r.gemenge_nontrivial);
        if (overlap > 1e-6) {
            EXPECT_FALSE(r.condition_a);
            EXPECT_GT(r.off_diagonal_norm, 1e-6);
        }
        EXPECT_FALSE(r.satisfied());
    }
}

TEST(Objectification, OrthogonalBranchesGiveDiagonalPointerButTrivialGemenge) {
    // post = eigenvectors: branches are orthogonal, so (A) holds while the
    // pure final state still carries only the trivial gemenge.
    const auto c = qubit_coupling();
    const auto o = measure(c, normalize(e(2, 0) + e(2, 1).scaled(Complex{0.0, 2.0})));
    const auto r = check_objectification(o);
    EXPECT_TRUE(r.condition_a);
    EXPECT_FALSE(r.condition_b);
    EXPECT_LE(r.off_diagonal_norm, 1e-12);
}

TEST(Objectification, ClaimedPointerGemengeSatisfiesBoth) {
    const auto f = fixtures::random_coupling(42, 3, 3, 3);
    const auto o = measure(f.coupling, f.input);
    std::vector<GemengeComponent> comps;
    for (std::size_t k = 0; k < o.probabilities.size(); ++k)
        comps.push_back({o.probabilities[k], DensityOperator::pure(o.pointers[k])});
    const auto r = check_objectification(o, GemengeState::mixed(comps), {0});
    EXPECT_TRUE(r.condition_a);
    EXPECT_TRUE(r.condition_b);
    EXPECT_TRUE(r.gemenge_nontrivial);
    EXPECT_TRUE(r.satisfied());
}
