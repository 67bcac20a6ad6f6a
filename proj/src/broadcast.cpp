#include "detail/run_common.hpp"
#include "dpsim/protocols.hpp"

namespace dpsim {

RunReport run_broadcast(const Mdp& mdp, const ShardedDataset& data, const DeltaNoise& noise,
                        const RunOptions& options) {
  noise.validate();
  data.check_consistent(mdp);
  const ValueTable vstar = detail::reference_values(mdp, options);

  RunReport report;
  report.meta = detail::base_meta("broadcast", mdp, data, noise, options);
  detail::TraceRecorder recorder(report, options);

  ValueTable v(mdp.n_states());
  double err = sup_distance(v, vstar);
  bool stop = recorder.record(0, err, err, 0.0, 0, &v);
  for (std::uint64_t t = 0; t < options.rounds && !stop; ++t) {
    ValueTable next(mdp.n_states());
    auto lookup = [&v](StateId s) { return v[s]; };
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      next[s] = backup_state(mdp, s, lookup);
      if (noise.active()) next[s] += noise.offset(data.owner(s), t, s);
    }
    v = std::move(next);
    err = sup_distance(v, vstar);
    stop = recorder.record(t + 1, err, err, 0.0, 0, &v);
  }
  recorder.finish();
  report.final_values = v;
  report.machine_outputs.assign(1, std::vector<double>(v.values().begin(), v.values().end()));
  return report;
}

}  // namespace dpsim
