#pragma once

namespace spectral {

struct AiryValue {
    double ai = 0.0;
    double aip = 0.0;  // Ai'
};

// Ai and Ai' for real x: quad-precision Maclaurin series for |x| <= 8,
// asymptotic expansions beyond.
AiryValue airy_ai(double x);

double airy_ai0();   // Ai(0)
double airy_aip0();  // Ai'(0)

}  // namespace spectral
