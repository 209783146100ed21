#pragma once

#include <vector>

#include "polychain/mat2.hpp"
#include "polychain/model.hpp"

namespace polychain {

enum class BlockKind { Elliptic, PlusIdentity, MinusIdentity, Hyperbolic };

const char* to_string(BlockKind kind);

/// Classify a unimodular matrix: ±𝟏 within 1e-9, elliptic if |Tr| < 2 - 1e-9.
BlockKind classify_block(const Mat2& t);

struct DefectReport {
  double E = 0.0;
  double defect = 0.0;     ///< ‖[T₋, T₊]‖
  double tolerance = 0.0;  ///< 1e-9·(1 + ‖T₊‖‖T₋‖)
  double trace_plus = 0.0;
  double trace_minus = 0.0;
  BlockKind kind_plus = BlockKind::Hyperbolic;
  BlockKind kind_minus = BlockKind::Hyperbolic;

  bool commuting() const { return defect < tolerance; }
  bool admissible() const {
    return kind_plus != BlockKind::Hyperbolic && kind_minus != BlockKind::Hyperbolic;
  }
  bool critical() const { return commuting() && admissible(); }
};

DefectReport commutator_defect(const PolymerEnsemble& ensemble, double E);

/// Critical energies in [lo, hi]: grid scan, sign-change bisection on the
/// commutator entries and golden-section refinement of defect minima.
std::vector<double> find_critical_energies(const PolymerEnsemble& ensemble, double lo, double hi,
                                           int grid_n = 2001, double tol = 1e-13);

/// Simultaneous rotation frame at a critical energy.
struct CriticalFrame {
  double E_c = 0.0;
  Mat2 M = Mat2::identity();
  Mat2 M_inv = Mat2::identity();
  /// Principal angles in (-π, π].
  double eta_plus = 0.0;
  double eta_minus = 0.0;
  /// Rotation numbers per block: η plus the 2π multiple fixed by the Prüfer lift.
  double eta_lift_plus = 0.0;
  double eta_lift_minus = 0.0;
  BlockKind kind_plus = BlockKind::Elliptic;
  BlockKind kind_minus = BlockKind::Elliptic;
  Mat2 T_plus;
  Mat2 T_minus;

  double eta(Sign s) const { return s == Sign::Plus ? eta_plus : eta_minus; }
  double eta_lift(Sign s) const { return s == Sign::Plus ? eta_lift_plus : eta_lift_minus; }
  /// max over signs of ‖M T M⁻¹ − R(η)‖.
  double conjugation_residual() const;
  /// ‖M‖·‖M⁻¹‖.
  double condition() const;
  /// m(θ): continuous lift of the projective action of M, m(0) in [-π, π).
  double m(double theta) const;
  Mat2 conjugate(const Mat2& t) const { return M * t * M_inv; }
};

CriticalFrame build_frame(const PolymerEnsemble& ensemble, double E_c);

/// Coefficients a = v*Xv, b = vᵀXv of X = M T^{E_c+ε} M⁻¹, v = (1,-i)/√2.
struct Reflection {
  double eps = 0.0;
  cplx a_plus, b_plus, a_minus, b_minus;
  cplx a(Sign s) const { return s == Sign::Plus ? a_plus : a_minus; }
  cplx b(Sign s) const { return s == Sign::Plus ? b_plus : b_minus; }
  /// Lifted η^ε: arg(a) on the branch nearest the frame's lifted η.
  double eta_eps(Sign s, const CriticalFrame& frame) const;
};

/// (a, b) of any 2x2 real matrix in the rotation eigenbasis.
void ab_coefficients(const Mat2& x, cplx& a, cplx& b);

Reflection reflection_coefficients(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double eps);

struct FirstOrderData {
  cplx c_plus, c_minus;    ///< e^{iη} ∂_ε b
  double d_plus = 0.0;     ///< ∂_ε η^ε
  double d_minus = 0.0;
  cplx c(Sign s) const { return s == Sign::Plus ? c_plus : c_minus; }
  double d(Sign s) const { return s == Sign::Plus ? d_plus : d_minus; }
};

/// Exact first-order data from the product-rule derivative.
FirstOrderData first_order_data(const CriticalFrame& frame, const PolymerEnsemble& ensemble);
/// Same quantities from central differences of reflection_coefficients with step h.
FirstOrderData first_order_data_fd(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double h);

/// Order r from log|b| against log ε; OrderUndetermined when a slope is off by more than 0.25.
int classify_order(const std::vector<double>& eps, const std::vector<double>& b_abs);

/// Order of the critical energy from ε = 2^-j, j = 6..16.
int critical_order(const CriticalFrame& frame, const PolymerEnsemble& ensemble);

struct AnomalyReport {
  cplx mean_e2;  ///< ⟨e^{2iη±}⟩
  cplx mean_e4;  ///< ⟨e^{4iη±}⟩
  bool anomalous2 = false;
  bool anomalous4 = false;
  bool any() const { return anomalous2 || anomalous4; }
};

AnomalyReport anomaly_check(const CriticalFrame& frame, const PolymerEnsemble& ensemble, double tol = 1e-9);

/// Everything a report row needs about one critical energy.
struct CriticalSummary {
  CriticalFrame frame;
  FirstOrderData first_order;
  AnomalyReport anomaly;
  int order = 0;
};

CriticalSummary analyze_critical(const PolymerEnsemble& ensemble, double E_c);

}  // namespace polychain
