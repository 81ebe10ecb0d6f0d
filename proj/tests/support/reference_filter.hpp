#pragma once

// Straight-line transcription of the adaptive-gain filter used as a test
// oracle. Shares no code with the library.

#include <cmath>

namespace oracle {

struct Filter {
  double N = 980.0, B = 16.0, GA = 1.0 / 21.0, LTh = 0.2, MTh = 1.0 / 17.0, RT = 0.25,
         LThM = 1.0 / 15.0, scale = 3500.0, eps = 1e-6;
  bool monitor = true;

  double VS = 0, VN = 0, AN = 0, Dp = 0;
  // last step
  double V = 0, AS = 0, AM = 0, S = 0, SM = 0, GV = 0;
  bool rejected = false;

  void seed(double d, double v) {
    VS = v;
    VN = v;
    AN = 0;
    Dp = d;
  }

  void feed(double D, double dt) {
    V = (D - Dp) / dt;
    AS = (V - VS) / dt;
    AM = (V - VN) / dt;
    double den = std::fabs(AN * B - AS);
    if (den < eps) den = eps;
    S = N / den;
    if (S > LTh) S = LTh;
    double den_m = std::fabs(AN * B - AM);
    if (den_m < eps) den_m = eps;
    SM = N / den_m;
    rejected = false;
    if (monitor && S < MTh) {
      if (S < SM * RT) {
        S = SM < LThM ? SM : LThM;
        rejected = true;
      }
    }
    const double VS_old = VS;
    VS = VS + S * (V - VS);
    GV = 1.0 / (D / scale + 1.0);
    VN = VN + GV * (V - VN);
    AN = AN + GA * ((VS - VS_old) / dt - AN);
    Dp = D;
  }
};

}  // namespace oracle
