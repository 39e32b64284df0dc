// Plants a small OR-of-two-conditions failure mechanism, samples a dataset
// from it, learns a fault tree back, and prints the result as DOT.

#include <iostream>

#include <ftlearn/ftlearn.hpp>

using namespace ftlearn;

int main() {
  GroundTruth gt;
  gt.tree.events = {
      Event{EventKind::Tle, "pump_failure", std::nullopt, std::nullopt},
      Event{EventKind::Basic, "",
            Threshold{"water_temp", Statistic::Min, 20.0, 0.0, FailureSide::Leq}, 0.3},
      Event{EventKind::Basic, "",
            Threshold{"pressure", Statistic::Min, 1.0, 0.0, FailureSide::Gt}, 0.3},
  };
  for (auto& e : gt.tree.events)
    if (e.threshold) e.label = make_label(*e.threshold);
  gt.tree.gates = {Gate{GateType::Or, 0, {1, 2}, 0.0}};
  gt.sensor_models["water_temp"] = {Interval{30.0, 90.0}, Interval{0.0, 15.0}};
  gt.sensor_models["pressure"] = {Interval{0.2, 1.0}, Interval{1.5, 3.0}};
  gt.n_units = 40;
  gt.days_per_unit = 50;

  const Dataset data = generate(gt, /*seed=*/7);
  const BalancedDataset balanced = balance(data, "pump_failure");

  LearnerConfig config;
  const FaultTree tree = learn(balanced, "pump_failure", config);

  std::cout << "significance: " << tree.significance << ", depth: " << depth(tree)
            << "\n\n"
            << to_dot(tree);

  const RecoveryReport report = recovery_report(tree, gt);
  std::cout << "\nrecall " << report.variable_recall << ", precision "
            << report.variable_precision << "\n";
  return 0;
}
