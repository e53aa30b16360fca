#pragma once

#include <optional>
#include <vector>

#include "expskel/genericity.hpp"
#include "expskel/pencil.hpp"
#include "expskel/skeleton.hpp"

namespace expskel {

/*
 * Donaldson-type sections over flat C: a sum of Gaussian peak sections over
 * an epsilon-net, expressed in the global Gaussian frame as the exponential
 * sum
 *
 *     mu(z) = sum_j a_j e^{-k|p_j|^2/4} e^{(k conj(p_j)/2) z},
 *
 * so |s(z)|_h = e^{-k|z|^2/4} |mu(z)| and the dominance region of term j is
 * exactly the Euclidean Voronoi cell of p_j.  Periodic nets replicate the
 * points by the domain lattice down to the 1e-300 Gaussian weight floor.
 *
 * Local models mu°_p keep the terms within 2*epsilon of p in the rescaled
 * coordinate zeta = epsilon*k*(z - p); on the flat model they agree with the
 * recentered sum term-for-term, so the model error is purely the Gaussian
 * tail.  Cluster detection + the s~ / s^ surgery remove near-critical zeros.
 */

struct Net {
    std::vector<Complex> points;
    double epsilon = 0.0;
    Box domain;
    bool periodic = false;
    double delta = 0.0;   // achieved min simplex quality at cutoff 2*epsilon
    double c1 = 0.2;      // separation slack: pairwise dist >= (1-c1) epsilon
    bool flagged = false; // quality target missed

    double dist(Complex a, Complex b) const;  // periodic-aware
};

// Greedy covering + rejection-sampled genericity.  Each new point is drawn
// in a c1*epsilon ball about an uncovered location until every simplex it
// forms with net points within 2*epsilon has quality >= c2_target.
Net generic_net(const Box& domain, double epsilon, double c1, double c2_target, bool periodic,
                uint64_t seed, int max_tries = 20000);

// Validates the covering/separation invariants and computes delta for
// hand-built nets.
Net make_net(std::vector<Complex> points, double epsilon, const Box& domain, bool periodic,
             double c1 = 0.2);

double net_quality(const Net& net);

struct SectionSpec {
    Net net;
    std::vector<Complex> amplitudes;  // unit modulus, one per net point
    double k = 1.0;                   // tensor power (any positive real here)
    double r0_cutoff = 0.0;           // effective peak support radius (weight floor)
    bool k_warning = false;           // k epsilon^2 < 4
    std::vector<Complex> rep_points;  // replicated peak centers, one per term
    std::vector<int> rep_base;        // base net index per term
    ExpSum global_sum{1, {ExpTerm{Complex(0, 0), CVec::Zero(1)}}};

    double epsk() const { return net.epsilon * k; }
};

SectionSpec build_section(const Net& net, const std::vector<Complex>& amplitudes, double k);

// Normalized C^1 datum of the section at z in the rescaled metric:
// e^{-b(z)} (|mu| + |D mu| / (epsilon k)) with the covariant derivative
// D mu = mu' - (k/2) conj(z) mu.
double section_c1(const SectionSpec& spec, Complex z);

// Skeleton of the global sum, cross-checked cell-for-cell against the
// Euclidean Voronoi diagram of the (replicated) net.  Throws std::logic_error
// on disagreement beyond 1e-8 * diam (an internal bug, not an input fault).
Skeleton2D section_skeleton(const SectionSpec& spec, const Box& window);

// Direct Voronoi diagram used for the cross-check (also handy on its own).
Skeleton2D voronoi_diagram(const std::vector<Complex>& points, const Box& window);

double edge_set_hausdorff(const Skeleton2D& a, const Skeleton2D& b);

struct LocalModel {
    // recentered + rescaled global sum (all terms), b(0) = 0
    ExpSum full{1, {ExpTerm{Complex(0, 0), CVec::Zero(1)}}};
    // the terms within 2*epsilon of p
    ExpSum model{1, {ExpTerm{Complex(0, 0), CVec::Zero(1)}}};
    std::vector<int> support;  // term indices (into rep_points) of the model
    CVec shift_m;       // applied exponent shift m_* (zero when not requested)
    double b_loc = 0.0; // normalization constant removed from both
    double error_sup = 0.0;  // sup_{|zeta|<=3} C^1 difference (tail size)
};

LocalModel local_model(const SectionSpec& spec, Complex p, bool apply_shift,
                       uint64_t seed = 0);

struct Cluster {
    Complex center;                 // representative (minimal C^1 datum)
    std::vector<Complex> members;   // grid hits, physical coordinates
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    double C3 = 0.0, C4 = 0.0;
    double R1 = 0.0;     // rescaled-metric radius
    double scale = 0.0;  // epsilon * k
    bool merged_flag = false;
};

// Grid scan for section_c1 < C3; hits within rescaled distance 8*R1 join one
// cluster.  grid_density <= 0 picks a step of R1/3 in the rescaled metric.
ClusterSet detect_clusters(const SectionSpec& spec, double C3, double R1,
                           int grid_density = 0);

enum class SectionMode { Raw, Tilde, Hat };

struct SectionField {
    double b = 0.0;     // dominance normalizer used
    Complex value;      // e^{-b} mu^
    Complex dh;         // e^{-b} (d mu^ - (k/2) conj(z) mu^)
    Complex da;         // e^{-b} dbar mu^ (cutoff terms only)

    double c1_rescaled(double epsk) const {
        return std::abs(value) + std::hypot(std::abs(dh), std::abs(da)) / epsk;
    }
};

class SurgeredSection {
  public:
    SurgeredSection(const SectionSpec& spec, const ClusterSet& clusters);

    SectionField eval(Complex z, SectionMode mode) const;
    // Newton refinement of a zero of the chosen field from z0.
    std::optional<Complex> refine_zero(Complex z0, SectionMode mode, double tol) const;

    const ClusterSet& clusters() const { return clusters_; }
    void set_eps_hat(std::size_t i, Complex v) { data_[i].eps_hat = v; }
    Complex eps_hat(std::size_t i) const { return data_[i].eps_hat; }

  private:
    struct ClusterData {
        Complex center;
        std::vector<Complex> members;
        ExpSum full{1, {ExpTerm{Complex(0, 0), CVec::Zero(1)}}};
        ExpSum model{1, {ExpTerm{Complex(0, 0), CVec::Zero(1)}}};
        double b_loc = 0.0;
        Complex m_star;
        Complex eps_hat;
    };
    const SectionSpec* spec_;
    ClusterSet clusters_;
    std::vector<ClusterData> data_;
    friend struct SurgeryAccess;
};

struct Surgery {
    SurgeredSection field;
    std::vector<Complex> eps_hat;
    bool ok = true;
    double best_margin = 0.0;  // worst post-surgery C^1 minimum over cluster balls
};

// s~ replaces the sum by its exact local model inside 2R1 of each cluster
// (smooth cutoff to 3R1); s^ additionally adds eps^_i inside R1 (cutoff to
// 2R1), with eps^_i drawn at magnitude 0.1*C3 and random phase until the
// normalized C^1 minimum over the cluster ball exceeds C4 = 0.05*C3.
Surgery perturb_section(const SectionSpec& spec, const ClusterSet& clusters, uint64_t seed);

struct Coloring {
    std::vector<int> group;  // per net point
    int n_groups = 0;
};

// Greedy coloring of the Voronoi adjacency graph (no two adjacent points
// share a group), then the section pencil a_{0,i} = -a_{inf,i} zeta_{g(i)}
// on the shared exponents of the global sum.
std::pair<Coloring, PencilSpec> color_and_pencil(const SectionSpec& spec);

}  // namespace expskel
