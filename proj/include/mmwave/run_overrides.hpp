#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmwave {

/// Command-line overrides layered on top of a config file.
struct RunOverrides {
    std::vector<std::string> schemes;
    std::optional<std::uint64_t> seed;
    std::optional<long> iterations;
    std::optional<int> workers;
};

} // namespace mmwave
