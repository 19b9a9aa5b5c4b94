#pragma once

#include <string>

#include "tlqr/types.hpp"

namespace tlqr {

// Dataset CSV format: header `y,x1,...,xp`, one record per row, decimal
// point '.', no missing values.
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(const Dataset& d, const std::string& path);

}  // namespace tlqr
