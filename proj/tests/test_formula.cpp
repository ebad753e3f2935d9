#include "mtlseir/parser.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mtlseir;

TEST(Parse, TableSpecificationShape) {
  const Formula f = parse("G[0,100](I <= 0.3) & G[0,100](D <= 0.05) & F[40,60](R >= 8)");
  ASSERT_EQ(f.kind(), FormulaKind::And);
  EXPECT_EQ(f.left().kind(), FormulaKind::And);
  EXPECT_EQ(f.left().left().kind(), FormulaKind::Always);
  EXPECT_EQ(f.left().right().kind(), FormulaKind::Always);
  EXPECT_EQ(f.right().kind(), FormulaKind::Eventually);
  EXPECT_EQ(f.right().bound(), (TimeBound{40, 60}));
  const auto& p = f.right().child().predicate();
  EXPECT_EQ(p.coordinate, Compartment::R);
  EXPECT_EQ(p.relation, Relation::GE);
  EXPECT_EQ(p.threshold, 8.0);
}

TEST(Parse, SingleAtom) {
  const Formula f = parse("I <= 0.3");
  ASSERT_EQ(f.kind(), FormulaKind::Atomic);
  EXPECT_EQ(f.predicate(), (AtomicPredicate{Compartment::I, Relation::LE, 0.3}));
}

TEST(Parse, ReversedBoundIsBoundError) {
  EXPECT_THROW(parse("G[5,3](I <= 1)"), BoundError);
  try {
    parse("G[5,3](I <= 1)");
  } catch (const BoundError& e) {
    EXPECT_EQ(e.position(), 1u);
  }
}

TEST(Parse, SyntaxErrorsCarryPositions) {
  auto position_of = [](const char* text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.position();
    }
    ADD_FAILURE() << "no error for " << text;
    return 0;
  };
  EXPECT_EQ(position_of("X <= 1"), 0u);
  EXPECT_EQ(position_of("I < 1"), 2u);
  EXPECT_EQ(position_of("(I <= 1"), 7u);
  EXPECT_EQ(position_of("I <= 1 )"), 7u);
  EXPECT_EQ(position_of("G[0,x](I <= 1)"), 4u);
  EXPECT_EQ(position_of("I <= abc"), 5u);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_EQ(parse("I <= 1 | E <= 1 & S <= 1"),
            Formula::disjunction(parse("I <= 1"), Formula::conjunction(parse("E <= 1"), parse("S <= 1"))));
  EXPECT_EQ(parse("I <= 1 & E <= 1 & S <= 1"),
            Formula::conjunction(Formula::conjunction(parse("I <= 1"), parse("E <= 1")), parse("S <= 1")));
  EXPECT_EQ(parse("!I <= 1 U[0,2] E >= 0"),
            Formula::until(Formula::negation(parse("I <= 1")), parse("E >= 0"), {0, 2}));
}

TEST(Parse, RoundTripThroughText) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    const Formula f = testing_support::random_formula(rng, 3, 12);
    const std::string text = f.to_string();
    EXPECT_EQ(parse(text), f) << text;
    EXPECT_EQ(parse(text).to_string(), text);
  }
}

TEST(Horizon, Examples) {
  EXPECT_EQ(parse("I <= 0.3").horizon(), 0u);
  EXPECT_EQ(parse("G[0,100](I <= 0.3)").horizon(), 100u);
  EXPECT_EQ(parse("F[40,60] G[0,15](I <= 0.3)").horizon(), 75u);
  EXPECT_EQ(parse("I <= 1 U[2,5] G[0,3] E <= 1").horizon(), 8u);
  EXPECT_EQ(parse("G[0,4] I <= 1 U[0,2] E <= 1").horizon(), 4u + 1u);
}

TEST(Formula, ConstructorsValidate) {
  EXPECT_THROW(Formula::always(Formula::truth(), {3, 2}), std::invalid_argument);
  EXPECT_THROW(Formula::atom(Compartment::I, Relation::LE, std::numeric_limits<double>::infinity()),
               std::invalid_argument);
}
