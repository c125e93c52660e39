#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hypercross {

using Perm = std::vector<int>;

// A finite permutation group given by generators; elements materialize on
// demand under a hard cap, since sharpness is an exact claim.
class FinitePermGroup {
public:
    FinitePermGroup(int degree, std::vector<Perm> generators);

    static FinitePermGroup from_json(const std::string& text);
    std::string to_json() const;

    int degree() const { return degree_; }
    const std::vector<Perm>& generators() const { return gens_; }

    // Closure under composition; throws when the cap is exceeded.
    const std::vector<Perm>& elements(size_t cap = 1000000) const;

    static FinitePermGroup symmetric(int n);
    static FinitePermGroup alternating(int n);

private:
    int degree_;
    std::vector<Perm> gens_;
    mutable std::vector<Perm> elements_;
};

struct SharpCertificate {
    bool sharp;
    long long group_order;
    long long tuple_count;
    bool transitive;
    bool free;
    // A violation: either a nonidentity element fixing a tuple, or an
    // unreachable tuple.
    std::optional<Perm> fixing_element;
    std::optional<std::vector<int>> stuck_tuple;
};

SharpCertificate verify_sharp_transitive(const FinitePermGroup& g, int k,
                                         size_t cap = 1000000);

// Addition/multiplication tables over 0..q-1 with 0 and 1 distinguished.
// Right distributivity holds; a left-distributivity failure is recorded
// when present.
struct NearField {
    int q;
    std::vector<std::vector<int>> add;
    std::vector<std::vector<int>> mul;
    std::optional<std::array<int, 3>> left_distributivity_failure;

    int plus(int a, int b) const { return add[a][b]; }
    int times(int a, int b) const { return mul[a][b]; }
    void verify() const;  // all structure axioms, exhaustively
};

// The order-9 near-field: GF(9) with multiplication twisted by the cube
// map on one side.  Only q = 9 is supported.
NearField dickson_near_field(int q);

// Maps x -> x*a + b (a nonzero), multiplying on the distributive side so
// composition stays inside the set.
FinitePermGroup affine_group(const NearField& nf);

// PGL_2 over the field with q elements acting on the q+1 projective
// points; q a prime power <= 16.
FinitePermGroup pgl2_fq_action(int q);

}  // namespace hypercross
