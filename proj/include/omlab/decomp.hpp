#pragma once

// Calderón–Zygmund cubes of a level set, the two-operator families Ω_k, the
// Γ flags, the principal-cube forest, and the per-cube lemma audits built on
// them.

#include <cstdint>
#include <span>
#include <vector>

#include "omlab/geometry.hpp"
#include "omlab/orlicz.hpp"
#include "omlab/report.hpp"
#include "omlab/weights.hpp"
#include "omlab/young.hpp"

namespace omlab {

/// Maximal dyadic cubes of one grid whose Luxemburg average exceeds λ.
struct CZDecomposition {
  double lambda = 0.0;
  YoungPhi phi;
  int grid = 0;
  std::vector<DyadicCube> cubes;    // sorted, pairwise disjoint
  std::vector<std::uint8_t> mask;   // per cell: covered by some cube
  std::vector<Index> label;         // per cell: index into cubes, or -1

  bool all_inside(const Domain& d) const;
};

/// Cubes above the table's top generation are reached by climbing with
/// direct Luxemburg averages until the average drops to λ or below.
CZDecomposition cz_from_table(const GridFunction& f, const YoungPhi& phi, const CubeTable& table,
                              double lambda);
CZDecomposition cz_cubes(const GridFunction& f, const YoungPhi& phi, int grid, double lambda);
CZDecomposition cz_cubes(const GridFunction& f, const YoungPhi& phi, int grid, double lambda,
                         GenRange gens);

/// Union equals {M > λ} (exact), each cube's average > λ, each parent's <= λ.
AuditReport cz_check(const GridFunction& f, const CZDecomposition& cz, const MaximalField& m);

enum class Source { R, S };  // R: cube of {M_D v > a^k}; S: cube of {M_{Φ,D} g > a^k}

struct OmegaCube {
  DyadicCube cube;
  Source source = Source::R;
  bool gamma = false;
};

struct OmegaFamily {
  int k = 0;
  double a = 2.0;
  int grid = 0;
  CZDecomposition r_family;
  CZDecomposition s_family;
  std::vector<OmegaCube> cubes;     // sorted by cube
  std::vector<std::uint8_t> mask;   // per cell: in Ω_k
  std::vector<Index> label;         // per cell: index into cubes, or -1

  double level() const;  // a^k
};

/// Ω_k from the two CZ families at level a^k: for each intersecting pair the
/// S cube when S ⊆ R, the R cube otherwise.
OmegaFamily omega_from(const Domain& d, const CZDecomposition& r, const CZDecomposition& s,
                       double a, int k);
OmegaFamily omega_decomposition(const GridFunction& v, const GridFunction& g, const YoungPhi& phi,
                                double a, int k, int grid = 0);

/// Flags cubes holding at least one cell with v <= a^(k+1).
OmegaFamily gamma_set(OmegaFamily fam, const GridFunction& v);

/// a^k/[v] <= inf_Q v on every cube; on Γ cubes additionally
/// inf_Q v <= avg_Q v <= [v] inf_Q v <= [v] a^(k+1). The infimum runs over
/// the box cells of Q; the first link is checked only for cubes inside the
/// box.
AuditReport omega_checks(const OmegaFamily& fam, const GridFunction& v, double a1_v);

struct ForestNode {
  int level = 0;
  Index member = 0;  // index into the level's family cubes
  DyadicCube cube;
  double u_integral = 0.0;
  double log_mu = 0.0;  // log(b_k a^(-αrk) avg_Q u)
  int generation = -1;  // n with the node in G_n; -1 when not principal
  int parent = -1;      // qualifying node of G_(n-1)
};

struct PrincipalForest {
  int N = 0;
  double a = 2.0;
  double alpha = 1.5;
  YoungPhi phi;
  std::vector<ForestNode> nodes;               // Δ_N, by level then cube
  std::vector<std::vector<int>> ancestors;     // nodes whose cube strictly contains
  std::vector<std::vector<int>> generations;   // G_0, G_1, ...

  bool principal(int i) const { return nodes[static_cast<std::size_t>(i)].generation >= 0; }
  std::size_t principal_count() const;
};

/// `families` hold consecutive levels N, N+1, ... with Γ flags set.
/// A node joins the first G_(n+1) for which some G_n node qualifies as its
/// parent; the first qualifying parent is recorded.
PrincipalForest principal_forest(std::span<const OmegaFamily> families, const GridFunction& u,
                                 const YoungPhi& phi, double a, double alpha);

/// Re-evaluates the parent conditions on a built forest.
AuditReport forest_check(const PrincipalForest& forest);

/// b_k/[v]^r <= avg_Q min(v^r, b_(k+1)) <= b_(k+1) for every cube of a
/// family at level ℓ >= k.
AuditReport lemma23_check(const OmegaFamily& fam, const GridFunction& v, const YoungPhi& phi, int k,
                          double a1_v);

struct Lemma24Constant {
  double p = 0.0;
  double p_dual = 0.0;
  double eta = 0.0;
  double C = 0.0;
};

/// C = Φ(a)[v]^r · C0^(1/p') · ([v]^r [v^r] a^r)^η with η = 1/(p'(1-ε)).
/// Requires p > 1/ε.
Lemma24Constant lemma24_constant(const YoungPhi& phi, double a, const AInfParams& ainf_vr,
                                 double p, double a1_v, double a1_vr);

/// v_t(E) <= C v_t(Q) a^((t-k)rη) with E = Q ∩ {M_D v > a^k}.
Check lemma24_check(const DyadicCube& q, int t, const GridFunction& v, const MaximalField& mdv,
                    const YoungPhi& phi, double a, int k, const Lemma24Constant& c);

}  // namespace omlab
