#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "acceptance.hpp"
#include "parfluor/log.hpp"

using namespace acceptance;

int main(int argc, char** argv) {
  CLI::App app{"parfluor acceptance criteria"};
  std::vector<int> only, known_red;
  std::string report;
  app.add_option("--only", only, "Criteria to run (default all)")->delimiter(',');
  app.add_option("--known-red", known_red,
                 "Criteria whose FAIL is documented; they do not change the exit status")
      ->delimiter(',');
  app.add_option("--report", report, "Also write the report to this file");
  CLI11_PARSE(app, argc, argv);
  parfluor::log::set_level(parfluor::log::Level::warn);

  const std::set<int> want(only.begin(), only.end());
  const std::set<int> red(known_red.begin(), known_red.end());
  const auto selected = [&](int id) { return want.empty() || want.count(id); };

  std::vector<std::pair<std::vector<int>, std::function<std::vector<Verdict>()>>> plan = {
      {{1}, [] { return std::vector{degenerate_matching()}; }},
      {{2}, [] { return std::vector{curve_ordering()}; }},
      {{3}, [] { return std::vector{perturbative_chain()}; }},
      {{4}, [] { return std::vector{walkoff_maxima()}; }},
      {{5}, [] { return std::vector{pulse_flattening()}; }},
      {{6}, [] { return std::vector{wigner_oracle()}; }},
      {{7, 8}, [] { return high_gain(); }},
      {{9}, [] { return std::vector{invariants()}; }},
      {{10}, [] { return std::vector{desk_scale_statement()}; }},
  };

  std::ostringstream text;
  int unexpected = 0;
  std::vector<std::string> summary;
  for (const auto& [ids, run] : plan) {
    bool any = false;
    for (int id : ids) any = any || selected(id);
    if (!any) continue;
    const auto t0 = std::chrono::steady_clock::now();
    auto verdicts = run();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& v : verdicts) {
      if (!selected(v.id)) continue;
      v.seconds = secs / static_cast<double>(verdicts.size());
      const bool documented = !v.pass && red.count(v.id);
      if (!v.pass && !documented) ++unexpected;
      std::string line = fmt("criterion %2d: %s  %s (%.1f s)%s", v.id, v.pass ? "PASS" : "FAIL",
                             v.title.c_str(), v.seconds, documented ? " [known red]" : "");
      std::cout << line << '\n';
      text << line << '\n';
      for (const auto& l : v.lines) {
        std::cout << "    " << l << '\n';
        text << "    " << l << '\n';
      }
      std::cout.flush();
      summary.push_back(line);
    }
  }
  std::cout << "\nsummary\n";
  text << "\nsummary\n";
  for (const auto& s : summary) {
    std::cout << s << '\n';
    text << s << '\n';
  }
  if (!report.empty()) std::ofstream(report) << text.str();
  return unexpected == 0 ? 0 : 1;
}
