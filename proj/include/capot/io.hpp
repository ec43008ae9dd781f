#pragma once

// File formats: capacities as JSON {"ground": [labels], "values": [2^n reals]}
// indexed by subset bits, point functions as `label,value` CSV, and loss
// matrices as CSV with a header row of column labels and one row per row
// label. Loaders throw std::runtime_error whose message carries the path and
// the line (CSV) or value index (JSON) of the offense.

#include <string>

#include "capot/capacity.hpp"
#include "capot/product.hpp"

namespace capot {

// validate = false skips the monotonicity check and yields a raw set function
// (still grounded at zero), for property inspection of non-capacities.
Capacity load_capacity_json(const std::string& path, bool validate = true);
void save_capacity_json(const std::string& path, const Capacity& gamma);

GroundFunction load_ground_function_csv(const std::string& path);
void save_ground_function_csv(const std::string& path, const GroundFunction& f);

// The corner cell of the header is ignored on load and written as "loss".
LossMatrix load_loss_csv(const std::string& path);
void save_loss_csv(const std::string& path, const LossMatrix& loss);

}  // namespace capot
