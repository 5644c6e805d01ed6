#include <catch2/catch_amalgamated.hpp>

#include "dmpqc/angles.hpp"

using namespace dmpqc;

TEST_CASE("Z8 addition table") {
  CHECK(add(AngleZ8(1), AngleZ8(2)) == AngleZ8(3));
  CHECK(add(AngleZ8(7), AngleZ8(1)) == AngleZ8(0));
  CHECK(add(AngleZ8(4), AngleZ8(4)) == AngleZ8(0));
}

TEST_CASE("Z8 is the cyclic group of order 8") {
  // Exhaustive 8x8(x8) checks: closure, associativity, identity, inverses.
  for (int a = 0; a < 8; ++a) {
    CHECK(add(AngleZ8(a), AngleZ8(0)) == AngleZ8(a));
    bool has_inverse = false;
    for (int b = 0; b < 8; ++b) {
      if (add(AngleZ8(a), AngleZ8(b)) == AngleZ8(0)) has_inverse = true;
      for (int c = 0; c < 8; ++c) {
        CHECK(add(add(AngleZ8(a), AngleZ8(b)), AngleZ8(c)) ==
              add(AngleZ8(a), add(AngleZ8(b), AngleZ8(c))));
      }
    }
    CHECK(has_inverse);
  }
}

TEST_CASE("signed angle") {
  CHECK(signed_angle(AngleZ8(1), 1) == AngleZ8(7));
  CHECK(signed_angle(AngleZ8(0), 1) == AngleZ8(0));
  CHECK(signed_angle(AngleZ8(6), 1) == AngleZ8(2));
  for (int a = 0; a < 8; ++a)
    CHECK(signed_angle(signed_angle(AngleZ8(a), 1), 1) == AngleZ8(a));
}

TEST_CASE("negative constructor wraps") {
  CHECK(AngleZ8(-1) == AngleZ8(7));
  CHECK(AngleZ8(-8) == AngleZ8(0));
  CHECK(AngleZ8(17) == AngleZ8(1));
}

TEST_CASE("clifford predicate") {
  for (int k : {0, 2, 4, 6}) CHECK(AngleZ8(k).is_clifford());
  for (int k : {1, 3, 5, 7}) CHECK_FALSE(AngleZ8(k).is_clifford());
}

TEST_CASE("qubit key composition matches operator algebra") {
  // Z(z2) X^{x2} Z(z1) X^{x1} = Z(z2 + (-1)^{x2} z1) X^{x1 xor x2}
  for (int z1 = 0; z1 < 8; ++z1)
    for (int x1 = 0; x1 < 2; ++x1)
      for (int z2 = 0; z2 < 8; ++z2)
        for (int x2 = 0; x2 < 2; ++x2) {
          QubitKey inner{AngleZ8(z1), x1}, outer{AngleZ8(z2), x2};
          QubitKey r = inner.then(outer);
          CHECK(r.zeta == AngleZ8(z2 + (x2 ? -z1 : z1)));
          CHECK(r.x == (x1 ^ x2));
        }
}

TEST_CASE("qubit key inverse") {
  for (int z = 0; z < 8; ++z)
    for (int x = 0; x < 2; ++x) {
      QubitKey k{AngleZ8(z), x};
      CHECK(k.then(k.inverse()).identity());
      CHECK(k.inverse().then(k).identity());
    }
}

TEST_CASE("rng determinism and split independence") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  Rng c1 = c.split("one");
  Rng c2 = c.split("two");
  CHECK(c1.next_u64() != c2.next_u64());
}
