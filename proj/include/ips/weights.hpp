#pragma once

#include "ips/qkernel.hpp"

namespace ips::weights {

/// Parameters of one stochastic higher spin six vertex weight L^{(J)}_{u,s}.
/// q^J is carried as the independent value `qJ` (analytic continuation);
/// `J` is the integer spin when known, 0 otherwise.
struct VertexParams {
    double q = 0;
    double u = 0;
    double s = 0;
    double qJ = 0;
    int J = 0;

    static VertexParams integer_spin(double q, double u, double s, int J);
    static VertexParams analytic(double q, double u, double s, double qJ);
};

/// Spin-1 weights, the explicit four-case rational table.
double l1_weight(const VertexParams& p, int i1, int j1, int i2, int j2);

/// General fused weight L^{(J)}_{u,s}(i1,j1;i2,j2). Dispatches to the
/// rational J=1 table, the q-beta-binomial reduction at u=s, the fusion
/// construction at q=0 (integer J <= 4), and the regularized
/// q-hypergeometric form otherwise.
double lj_weight(const VertexParams& p, int i1, int j1, int i2, int j2);

/// Boundary weight L^{(J)}_{u,s}(inf, j1; inf, j2) = phi_{q, s u qJ, s u}(j2 | inf);
/// independent of j1.
double l_boundary_weight(const VertexParams& p, int j2);

/// Explicit stochastic fusion of J spin-1 rows with spectral parameters
/// u, qu, ..., q^{J-1}u; exponential in J, intended for J <= 4.
double fused_weight(double q, double u, double s, int J, int i1, int j1, int i2, int j2);

enum class CrossRegime { GenericQ, QZero, QHahn, Unchecked };

struct CrossParams {
    double q = 0;
    double z = 0;
    double s1 = 0;
    double s2 = 0;
    CrossRegime regime = CrossRegime::Unchecked;

    static CrossParams make(double q, double z, double s1, double s2);
};

/// Strongest nonnegativity regime the numeric parameters satisfy.
CrossRegime validate_regime(double q, double z, double s1, double s2);

/// Cross vertex weight R_{z,s1,s2}(i1,i2;j1,j2); zero unless i1+j2 = i2+j1.
double r_weight(const CrossParams& p, int i1, int i2, int j1, int j2);

/// Boundary cross weight R^bdry_{z,s1,s2}(j1,j2) (limit of infinitely many
/// southwest paths).
double r_bdry_weight(const CrossParams& p, int j1, int j2);

}  // namespace ips::weights
