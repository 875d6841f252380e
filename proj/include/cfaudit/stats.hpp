#pragma once

namespace cfaudit {

// Regularized incomplete beta I_x(a, b) via Lentz continued fraction,
// accurate to ~1e-14 relative for the arguments used here.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
// of freedom: I_{df/(df+t^2)}(df/2, 1/2).
double student_t_two_sided_p(double t, double df);

}  // namespace cfaudit
