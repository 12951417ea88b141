#include <gtest/gtest.h>

#include <random>

#include "pqse/pauli.hpp"
#include "pqse/simulator.hpp"
#include "support.hpp"

using namespace pqse;

TEST(PauliString, RejectsBadLetters) {
  EXPECT_THROW(PauliString("XQ"), std::invalid_argument);
  EXPECT_THROW(PauliString(""), std::invalid_argument);
  EXPECT_NO_THROW(PauliString("IXYZ"));
}

TEST(PauliParse, SingleTerm) {
  const auto h = parse_pauli_sum("2\n1.0 ZZ\n");
  ASSERT_EQ(h.num_qubits(), 2u);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms()[0].coefficient, 1.0);
  EXPECT_EQ(h.terms()[0].string.letters(), "ZZ");
}

TEST(PauliParse, MergesDuplicates) {
  const auto h = parse_pauli_sum("2\n0.5 ZZ\n0.5 ZZ\n");
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms()[0].coefficient, 1.0);
}

TEST(PauliParse, DropsCancelledTerms) {
  const auto h = parse_pauli_sum("2\n0.5 ZZ\n-0.5 ZZ\n1 XI\n");
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h.terms()[0].string.letters(), "XI");
}

TEST(PauliParse, Errors) {
  EXPECT_THROW(parse_pauli_sum("2\n1.0 ZZZ\n"), ParseError);
  EXPECT_THROW(parse_pauli_sum("2\n1.0 ZQ\n"), ParseError);
  EXPECT_THROW(parse_pauli_sum("2\n1+2j ZZ\n"), ParseError);
  EXPECT_THROW(parse_pauli_sum("2\nabc ZZ\n"), ParseError);
  EXPECT_THROW(parse_pauli_sum("2\n1.0 ZZ extra\n"), ParseError);
  EXPECT_THROW(parse_pauli_sum("# nothing\n"), ParseError);
  EXPECT_THROW(parse_pauli_file("2\n# ref: 101\n1 ZZ\n"), ParseError);
  try {
    parse_pauli_sum("2\n1 ZZ\n\n1.0 ZZZ\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(PauliParse, CommentsAndReference) {
  const auto f = parse_pauli_file("# header\n3  # qubits\n# ref: 010\n-0.25 XYZ  # trailing\n\n1e-3 IIZ\n");
  EXPECT_EQ(f.hamiltonian.num_qubits(), 3u);
  EXPECT_EQ(f.hamiltonian.size(), 2u);
  ASSERT_TRUE(f.reference_bits);
  EXPECT_EQ(*f.reference_bits, "010");
}

TEST(PauliParse, RoundTrip) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = support::random_pauli_sum(4, 12, rng);
    const auto text = serialize_pauli_sum(h, std::string("0110"));
    const auto back = parse_pauli_file(text);
    EXPECT_EQ(back.hamiltonian, h);
    EXPECT_EQ(serialize_pauli_sum(back.hamiltonian, back.reference_bits), text);
  }
}

TEST(SpinRing, HeisenbergTriangleGroundEnergy) {
  const auto h = build_spin_ring(3, DisorderSpec{1.0, 1.0, std::vector<double>{0, 0, 0}});
  EXPECT_EQ(h.size(), 9u);
  EXPECT_NEAR(exact_ground(h).ground_energy, -3.0, 1e-12);
}

TEST(SpinRing, ZeroCouplingIsDiagonalField) {
  const auto h = build_spin_ring(3, DisorderSpec{0.0, 1.0, std::vector<double>{0.3, -0.2, 0.1}});
  ASSERT_EQ(h.size(), 3u);
  for (const auto& t : h.terms()) EXPECT_TRUE(t.string.is_diagonal());
  EXPECT_EQ(h.terms()[0].coefficient, 0.3);
  EXPECT_EQ(h.terms()[0].string.letters(), "ZII");
  EXPECT_EQ(h.terms()[2].string.letters(), "IIZ");
}

TEST(SpinRing, RejectsShortRing) {
  EXPECT_THROW(build_spin_ring(2, DisorderSpec{}), std::invalid_argument);
}

TEST(SpinRing, SeededDisorderIsDeterministicAndBounded) {
  const DisorderSpec spec{0.1, 1.5, std::uint64_t{42}};
  EXPECT_EQ(build_spin_ring(6, spec), build_spin_ring(6, spec));
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    for (double h : draw_disorder(8, 1.5, seed)) {
      EXPECT_GT(h, -1.5);
      EXPECT_LT(h, 1.5);
    }
  EXPECT_NE(draw_disorder(4, 1.0, 1), draw_disorder(4, 1.0, 2));
}

TEST(FieldOnlyGround, Examples) {
  EXPECT_EQ(field_only_ground_bits({0.3, -0.2}), "10");
  EXPECT_EQ(field_only_ground_bits({0.0, 0.0}), "00");
  EXPECT_EQ(field_only_ground_bits({-1, -1, -1}), "000");
}

TEST(FieldOnlyGround, MinimizesDiagonal) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto fields = draw_disorder(5, 1.0, seed);
    const auto h = build_spin_ring(5, DisorderSpec{0.0, 1.0, fields});
    const Eigen::MatrixXcd m = dense_matrix(h);
    const std::string bits = field_only_ground_bits(fields);
    const auto idx = std::stoul(bits, nullptr, 2);
    for (Eigen::Index b = 0; b < m.rows(); ++b) {
      double expect = 0.0;
      for (std::size_t i = 0; i < 5; ++i) expect += fields[i] * (1 - 2 * ((b >> (4 - i)) & 1));
      EXPECT_NEAR(m(b, b).real(), expect, 1e-14);
      EXPECT_LE(m(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)).real(), m(b, b).real() + 1e-14);
    }
  }
}
