// Non-physical stand-in for the ship-collision simulator. Reads "v_s rho0" lines on
// stdin and answers each with the maximum penetration in meters.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pckal/problems.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mock penetration simulator (line protocol)"};
  pckal::MockPenetration surface;
  double constant = NAN;
  bool emit_nan = false;
  std::size_t crash_after = 0;
  app.add_option("--scale", surface.scale);
  app.add_option("--v-ref", surface.v_ref);
  app.add_option("--rho-ref", surface.rho_ref);
  app.add_option("--exponent", surface.exponent);
  app.add_option("--constant", constant, "answer every request with this value");
  app.add_flag("--emit-nan", emit_nan, "answer with NaN");
  app.add_option("--exit-after", crash_after, "exit without answering request k+1");
  CLI11_PARSE(app, argc, argv);

  std::string line;
  std::size_t served = 0;
  while (std::getline(std::cin, line)) {
    if (crash_after > 0 && served == crash_after) return 4;
    std::istringstream in(line);
    double v = 0.0, rho = 0.0;
    if (!(in >> v >> rho)) {
      std::cout << "error: expected two numbers" << std::endl;
      continue;
    }
    if (emit_nan) {
      std::cout << "NaN" << std::endl;
    } else {
      const double out = std::isnan(constant) ? surface(v, rho) : constant;
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", out);
      std::cout << buf << std::endl;
    }
    ++served;
  }
  return 0;
}
