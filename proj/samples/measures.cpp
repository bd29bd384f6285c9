// Computes a few Mahler measures with the library and checks one identity.
//   sample_measures [polynomial-file]

#include <fstream>
#include <iomanip>
#include <iostream>

#include "mahler/identities.hpp"

int main(int argc, char** argv) {
  using namespace mahler;
  std::cout << std::setprecision(15);

  for (double lambda : {-8.0, 16.0}) {
    const auto q = q_measure(lambda);
    const auto r = r_measure(lambda);
    std::cout << "q(" << lambda << ") = " << q.value << " via " << method_name(q.method) << ", r(" << lambda
              << ") = " << r.value << '\n';
  }

  const auto report = verify_main(16.0);
  std::cout << "q(16) - (r(16) + p(16))/2 = " << report.residual << (report.passed ? " (pass)\n" : " (FAIL)\n");

  if (argc > 1) {
    std::ifstream in(argv[1]);
    if (!in) {
      std::cerr << "cannot open " << argv[1] << '\n';
      return 2;
    }
    const auto p = parse_polynomial(in);
    const auto torus = mahler_torus(p, 512);
    std::cout << "m(P) = " << torus.value << " +- " << torus.error_estimate << " on the torus grid";
    if (p.nvars() == 2) std::cout << ", " << mahler_jensen_2var(p).value << " by Jensen";
    std::cout << '\n';
  }
  return report.passed ? 0 : 1;
}
