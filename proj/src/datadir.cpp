#include "ransomlab/datadir.hpp"

#include <cstdlib>

#ifndef RANSOMLAB_DATA_DIR
#define RANSOMLAB_DATA_DIR "data"
#endif

namespace ransomlab {

std::filesystem::path default_data_dir()
{
    if (const char* env = std::getenv("RANSOMLAB_DATA_DIR"); env && *env)
        return env;
    return RANSOMLAB_DATA_DIR;
}

} // namespace ransomlab
