#include "seads/metrics.hpp"

#include <cstdio>

namespace seads {

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out.push_back(',');
    out += cells[i];
  }
  return out;
}

std::string epoch_csv_row(const EpochMetrics& m) {
  return csv_row({std::to_string(m.epoch), std::to_string(m.env_steps), format_number(m.actor_loss),
                  format_number(m.critic_loss), format_number(m.fm_nll), format_number(m.mean_reward),
                  format_number(m.mean_length), format_number(m.change_fraction), std::to_string(m.long_buffer),
                  std::to_string(m.recent_buffer)});
}

}  // namespace seads
