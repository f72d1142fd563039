#pragma once

#include <filesystem>
#include <string>

#include "penn/datagen.hpp"
#include "penn/missingness.hpp"

namespace penn {

/// A loaded dataset file: masked covariates (the omega flags double as the
/// observed flags) and the response column.
struct DataFile {
    PartialMatrix x;
    Vector y;

    std::size_t size() const { return y.size(); }
    int dim() const { return static_cast<int>(x.cols); }
};

/// Dataset CSV layout: header `x_1,...,x_d,omega_1,...,omega_d,y`; missing
/// covariate cells are empty fields (literal NaN also accepted on read);
/// numbers are written in shortest round-trip form, so save -> load -> save
/// is byte-identical.
void write_dataset_csv(const std::filesystem::path& path, const PartialMatrix& x, const Vector& y);

void write_dataset_csv(const std::filesystem::path& path, const SampleSet& rows);

DataFile read_dataset_csv(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of a file's bytes, hex-encoded (manifest content hash).
std::string file_hash(const std::filesystem::path& path);

}  // namespace penn
