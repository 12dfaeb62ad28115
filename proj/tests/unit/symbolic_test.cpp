#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rssforge/symbolic/assertion.hpp"
#include "rssforge/symbolic/text.hpp"

using namespace rssforge::symbolic;

namespace {

Term v(const char* n) { return Term::var(n); }
Rational q(long p, long d = 1) { return Rational(p, d); }

}  // namespace

TEST(Rational, ParsesDecimalsExactly) {
  EXPECT_EQ(parse_rational("0.3"), q(3, 10));
  EXPECT_EQ(parse_rational("-1.25e1"), q(-25, 2));
  EXPECT_EQ(parse_rational("6/4"), q(3, 2));
  EXPECT_EQ(parse_rational("1e-3"), q(1, 1000));
  EXPECT_THROW(parse_rational("1..2"), std::invalid_argument);
  EXPECT_THROW(parse_rational("3/0"), std::invalid_argument);
}

TEST(EvalTerm, Examples) {
  EXPECT_DOUBLE_EQ(eval_term(v("x") + 1, {{Var("x"), 2.0}}), 3.0);
  EXPECT_DOUBLE_EQ(eval_term(v("x") * v("x") * v("y"), {{Var("x"), 3.0}, {Var("y"), 2.0}}), 18.0);
  // 10*0.3 + 0.5*2*0.09 = 3 + 0.09
  Term t = v("v_r") * v("rho") + Term(q(1, 2)) * v("a_max") * v("rho") * v("rho");
  Store s{{Var("v_r"), 10.0}, {Var("rho"), 0.3}, {Var("a_max"), 2.0}};
  EXPECT_NEAR(eval_term(t, s), 3.09, 1e-12);
  ExactStore e{{Var("v_r"), q(10)}, {Var("rho"), q(3, 10)}, {Var("a_max"), q(2)}};
  EXPECT_EQ(t.evaluate(e), q(309, 100));
}

TEST(EvalTerm, MissingVariable) {
  EXPECT_THROW(eval_term(v("x") + v("y"), {{Var("x"), 1.0}}), MissingVariable);
}

TEST(Term, CanonicalForm) {
  Term a = v("x") * v("y") + v("y") * v("x") - 2 * v("x") * v("y");
  EXPECT_TRUE(a.is_zero());
  Term t1 = (v("x") + 1).pow(3);
  Term t2 = v("y") * v("y") - Term(q(3, 7));
  EXPECT_EQ((t1 + t2) - t2, t1);
  EXPECT_EQ(t1.degree(), 3u);
  EXPECT_EQ(t1.coefficient(Var("x"), 2), Term(3));
  EXPECT_EQ(t1.derivative(Var("x")), 3 * (v("x") + 1).pow(2));
  EXPECT_EQ((v("x") * 2).antiderivative(Var("x")), v("x") * v("x"));
}

TEST(Term, RingHomomorphismOnSamples) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_real_distribution<double> val(-3, 3);
  std::vector<Var> vars{Var("a"), Var("b"), Var("c")};
  auto random_term = [&]() {
    Term t;
    for (int k = 0; k < 4; ++k) {
      Term m(Rational(coef(rng), 1 + std::abs(coef(rng))));
      for (const auto& x : vars) m = m * Term(x).pow(static_cast<unsigned>(std::abs(coef(rng)) % 3));
      t += m;
    }
    return t;
  };
  for (int i = 0; i < 2000; ++i) {
    Term t1 = random_term();
    Term t2 = random_term();
    Store s{{vars[0], val(rng)}, {vars[1], val(rng)}, {vars[2], val(rng)}};
    double a = eval_term(t1, s);
    double b = eval_term(t2, s);
    double p = eval_term(t1 * t2, s);
    double scale = std::max(1.0, std::fabs(a) * std::fabs(b)) * 64;
    EXPECT_NEAR(p, a * b, scale * 1e-13);
    EXPECT_NEAR(eval_term(t1 + t2, s), a + b, scale * 1e-13);
    EXPECT_EQ((t1 + t2) - t2, t1);
  }
}

TEST(Satisfies, Examples) {
  Store x2{{Var("x"), 2.0}};
  EXPECT_TRUE(satisfies(x2, Assertion::le(v("x"), 2)));
  EXPECT_TRUE(satisfies(x2, Assertion::lt(1, v("x")) && Assertion::le(v("x"), 2)));
  EXPECT_FALSE(satisfies(Store{{Var("x"), 0.0}}, Assertion::ne(v("x"), 0)));
  EXPECT_THROW(satisfies(x2, Assertion::exists(Var("t"), Assertion::le(v("x"), v("t")))),
               QuantifiedAssertion);
  EXPECT_THROW(satisfies(x2, Assertion::le(v("y"), 2)), MissingVariable);
  EXPECT_TRUE(satisfies(x2, Assertion::implies(Assertion::lt(v("x"), 0), Assertion::bottom())));
}

TEST(Topology, Examples) {
  EXPECT_EQ(classify_topology(Assertion::le(v("x"), 2)), Topology::kClosed);
  EXPECT_EQ(classify_topology(Assertion::lt(1, v("x")) && Assertion::le(v("x"), 2)), Topology::kNeither);
  EXPECT_EQ(classify_topology(Assertion::top()), Topology::kBoth);
  EXPECT_EQ(classify_topology(Assertion::bottom()), Topology::kBoth);
  EXPECT_EQ(classify_topology(Assertion::ne(v("x"), 0)), Topology::kOpen);
  EXPECT_EQ(classify_topology(Assertion::eq(v("x"), 0)), Topology::kClosed);
  auto closed = Assertion::le(v("x"), 0);
  auto open = Assertion::lt(v("y"), 0);
  EXPECT_EQ(classify_topology(Assertion::implies(closed, open)), Topology::kOpen);
  EXPECT_EQ(classify_topology(Assertion::implies(open, closed)), Topology::kClosed);
  EXPECT_EQ(classify_topology(Assertion::implies(open, open)), Topology::kNeither);
}

TEST(Topology, DeMorganDuality) {
  std::mt19937 rng(11);
  std::vector<Assertion> atoms{Assertion::le(v("x"), 1), Assertion::lt(v("y"), 0), Assertion::eq(v("x"), v("y")),
                               Assertion::ne(v("x"), 3), Assertion::top()};
  std::function<Assertion(int)> gen = [&](int depth) -> Assertion {
    if (depth == 0) return atoms[rng() % atoms.size()];
    switch (rng() % 4) {
      case 0: return gen(depth - 1) && gen(depth - 1);
      case 1: return gen(depth - 1) || gen(depth - 1);
      case 2: return Assertion::implies(gen(depth - 1), gen(depth - 1));
      default: return !gen(depth - 1);
    }
  };
  auto swap = [](Topology t) {
    if (t == Topology::kOpen) return Topology::kClosed;
    if (t == Topology::kClosed) return Topology::kOpen;
    return t;
  };
  for (int i = 0; i < 2000; ++i) {
    Assertion a = gen(3);
    EXPECT_EQ(classify_topology(!a), swap(classify_topology(a))) << to_text(a);
  }
}

TEST(Substitute, Examples) {
  Var x("x");
  Var y("y");
  Assertion a = Assertion::gt(v("x"), 0);
  EXPECT_EQ(substitute(a, Substitution({{x, v("x") - 1}})), Assertion::gt(v("x") - 1, 0));
  // x := 0; y := x executed in order leaves y = 0, so y > x becomes 0 > 0.
  Assertion b = Assertion::gt(v("y"), v("x"));
  Assertion r = substitute(b, Substitution({{x, Term(0)}, {y, v("x")}}));
  EXPECT_TRUE(r.is_false());
  EXPECT_EQ(substitute(b, Substitution()), b);
}

TEST(Substitute, AgreesWithSequentialExecution) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> coef(-3, 3);
  std::uniform_real_distribution<double> val(-4, 4);
  std::vector<Var> vars{Var("x"), Var("y"), Var("z")};
  auto random_term = [&]() {
    Term t(coef(rng));
    for (const auto& w : vars) t += Term(coef(rng)) * Term(w).pow(static_cast<unsigned>(rng() % 2));
    if (rng() % 3 == 0) t += Term(vars[rng() % 3]) * Term(vars[rng() % 3]);
    return t;
  };
  auto random_atom = [&]() {
    Relation rels[] = {Relation::kLe, Relation::kLt, Relation::kEq, Relation::kNe};
    return Assertion::atom(random_term(), rels[rng() % 4]);
  };
  int cases = 0;
  for (int i = 0; i < 12000; ++i) {
    Assertion a = rng() % 2 ? (random_atom() && random_atom()) : (random_atom() || !random_atom());
    std::vector<std::pair<Var, Term>> asg;
    int k = 1 + static_cast<int>(rng() % 4);
    for (int j = 0; j < k; ++j) asg.emplace_back(vars[rng() % 3], random_term());
    Substitution sigma(asg);
    // Integer-valued stores keep both sides exact in double arithmetic.
    Store s;
    for (const auto& w : vars) s[w] = std::round(val(rng));
    Store after = sigma.execute(s);
    EXPECT_EQ(satisfies(s, substitute(a, sigma)), satisfies(after, a));
    ++cases;
  }
  EXPECT_GE(cases, 10000);
}

TEST(Substitute, NaiveOracleOnRandomStores) {
  Var x("x");
  Var y("y");
  Assertion b = Assertion::gt(v("y"), v("x"));
  Substitution sigma({{x, Term(0)}, {y, v("x")}});
  Assertion r = substitute(b, sigma);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> val(-10, 10);
  for (int i = 0; i < 100; ++i) {
    Store s{{x, val(rng)}, {y, val(rng)}};
    Store t = s;
    t[x] = 0;
    t[y] = t[x];
    EXPECT_EQ(satisfies(s, r), t[y] > t[x]);
  }
}

TEST(Substitute, DoesNotTouchBoundVariables) {
  Var t("t");
  Assertion a = Assertion::exists(t, Assertion::le(v("x"), v("t")) && Assertion::le(0, v("t")));
  Assertion r = substitute(a, std::map<Var, Term>{{t, Term(5)}, {Var("x"), v("y")}});
  EXPECT_EQ(r, Assertion::exists(t, Assertion::le(v("y"), v("t")) && Assertion::le(0, v("t"))));
  EXPECT_THROW(substitute(a, std::map<Var, Term>{{Var("x"), v("t")}}), std::logic_error);
}

TEST(Assertion, AtomNormalization) {
  EXPECT_EQ(Assertion::le(2 * v("x"), 4), Assertion::le(v("x"), 2));
  EXPECT_EQ(Assertion::eq(v("x"), 1), Assertion::eq(1, v("x")));
  EXPECT_EQ(Assertion::le(Term(q(1, 3)) * v("x"), Term(q(1, 2))), Assertion::le(2 * v("x"), 3));
  EXPECT_NE(Assertion::le(v("x"), 2), Assertion::ge(v("x"), 2));
  EXPECT_TRUE(Assertion::le(1, 2).is_true());
  EXPECT_TRUE(Assertion::lt(2, 2).is_false());
  EXPECT_EQ(!Assertion::le(v("x"), 2), Assertion::gt(v("x"), 2));
}

TEST(Assertion, FreeVariablesAndQuantifiers) {
  Var t("t");
  Assertion body = Assertion::le(v("x"), v("t"));
  Assertion e = Assertion::exists(t, body);
  EXPECT_EQ(e.free_variables(), std::set<Var>{Var("x")});
  EXPECT_FALSE(e.is_quantifier_free());
  EXPECT_EQ(Assertion::exists(t, Assertion::le(v("x"), 0)), Assertion::le(v("x"), 0));
  EXPECT_EQ(!e, Assertion::forall(t, Assertion::gt(v("x"), v("t"))));
}

TEST(Assertion, DesugarImplications) {
  Assertion a = Assertion::implies(Assertion::le(v("x"), 0), Assertion::lt(v("y"), 0));
  Assertion d = desugar_implications(a);
  EXPECT_EQ(d, Assertion::gt(v("x"), 0) || Assertion::lt(v("y"), 0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> val(-1, 1);
  for (int i = 0; i < 200; ++i) {
    Store s{{Var("x"), val(rng)}, {Var("y"), val(rng)}};
    EXPECT_EQ(satisfies(s, a), satisfies(s, d));
  }
}

TEST(Text, RoundTrip) {
  Var t("_T1");
  Assertion a = Assertion::disj(
      {Assertion::le(v("x_SV") * v("x_SV") - Term(q(3, 10)) * v("v_SV"), 2),
       Assertion::exists(t, Assertion::le(0, v("_T1")) && Assertion::ne(v("_T1"), v("x_SV"))),
       Assertion::implies(Assertion::lt(v("y"), 0), Assertion::eq(v("y"), v("x_SV")))});
  std::string s = to_text(a);
  EXPECT_EQ(parse_assertion(s), a);
  EXPECT_EQ(to_text(parse_assertion(s)), s);
  EXPECT_EQ(to_text(Term(q(-3, 2)) * v("x") * v("x") * v("y")), "(poly (-3/2 (x 2) (y 1)))");
  EXPECT_EQ(to_text(Assertion::le(v("x"), 2)), "(<= (poly (-2) (1 (x 1))) 0)");
}

TEST(Text, HandWrittenForms) {
  Assertion a = parse_assertion("(and (>= x 0) (< (* 2 x) (+ y 0.5)) (=> (!= x 1) (exists (t) (= t (^ x 2)))))");
  Store s{{Var("x"), 0.0}, {Var("y"), 1.0}};
  EXPECT_TRUE(a.free_variables() == (std::set<Var>{Var("x"), Var("y")}));
  EXPECT_EQ(parse_term("(/ (- x 1) 4)"), Term(q(1, 4)) * (v("x") - 1));
  EXPECT_THROW(parse_assertion("(and (<= x 1)"), ParseError);
  EXPECT_THROW(parse_assertion("(frob x)"), ParseError);
  EXPECT_THROW(parse_term("(/ x y)"), ParseError);
  EXPECT_EQ(to_infix(Assertion::le(v("x") * v("x") - 2 * v("y"), 0)), "x^2 - 2*y <= 0");
  (void)s;
}

TEST(FreshNames, AvoidsReserved) {
  FreshNames f({"_T1", "x"});
  EXPECT_EQ(f.next("T").name(), "_T2");
  EXPECT_EQ(f.next("T").name(), "_T3");
  EXPECT_EQ(f.next("u").name(), "_u1");
}
