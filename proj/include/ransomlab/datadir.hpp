#pragma once

#include <filesystem>

namespace ransomlab {

// Where the bundled data files (sample dataset, extension taxonomy) live.
// RANSOMLAB_DATA_DIR in the environment wins; otherwise the compiled-in
// location of the repository's data/ directory.
std::filesystem::path default_data_dir();

} // namespace ransomlab
