#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "hypercross/crossratio.hpp"
#include "hypercross/rational.hpp"

namespace hypercross {

// A finite symmetric nonnegative matrix with zero diagonal and a relaxed
// triangle inequality: rho(x,y) <= rho(x,z) + rho(z,y) + k.
class QuasimetricSpace {
public:
    QuasimetricSpace(std::vector<std::string> points,
                     std::vector<std::vector<Rational>> rho);

    static QuasimetricSpace from_json(const std::string& text);
    static QuasimetricSpace from_tree(const MetricTree& t,
                                      const std::vector<std::string>& points = {});
    std::string to_json() const;

    const std::vector<std::string>& points() const { return points_; }
    int size() const { return int(points_.size()); }
    int index_of(const std::string& p) const;
    const Rational& rho(int i, int j) const { return rho_[i][j]; }
    const Rational& defect() const { return defect_; }

private:
    std::vector<std::string> points_;
    std::vector<std::vector<Rational>> rho_;
    Rational defect_;
};

// Least k making every triangle inequality hold; 0 for pseudometrics.
Rational qm_defect(const std::vector<std::vector<Rational>>& m);

// (xy|zw) = (max of the three pair sums - (rho(x,y)+rho(z,w))) / 2.
CrossratioTable crossratio_from_qm(const QuasimetricSpace& q);

// The quasimetric on distinct triples: rho(X,Y) is the max of the nine
// crossratios (x_i x_j | y_m y_n), with shared elements across the two
// triples contributing 0 by the degenerate-argument convention.  Only the
// caller-supplied sample of triples is materialized.
using Triple = std::array<int, 3>;

Rational rho_of_triples(const CrossratioTable& tbl, const Triple& X, const Triple& Y);

QuasimetricSpace rho_on_triples(const CrossratioTable& tbl, const std::vector<Triple>& sample);

// A k-geodesic segment: rho(x_i, x_j) within k of |i-j| for all i,j.
struct GeodesicSegment {
    std::vector<int> points;
    Rational tolerance;
};

std::optional<GeodesicSegment> find_geodesic_segment(const QuasimetricSpace& q,
                                                     const Rational& k, int x, int y);

}  // namespace hypercross
