#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "seads/training.hpp"

namespace seads {

/// Round-trip-safe text of a double ("%.17g"); -0 prints as 0.
std::string format_number(double value);

std::string csv_row(const std::vector<std::string>& cells);

inline constexpr const char* kEpochCsvHeader =
    "epoch,env_steps,actor_loss,critic_loss,fm_nll,mean_reward,mean_length,change_fraction,long_buffer,recent_buffer";

std::string epoch_csv_row(const EpochMetrics& m);

}  // namespace seads
