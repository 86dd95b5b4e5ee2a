#pragma once

#include <stdexcept>
#include <string>

namespace lpool {

// Failure classes. exit_class() collapses them onto the process exit codes
// used by the CLI and the C API status enum: 1 usage, 2 malformed input,
// 3 shape mismatch, 4 numerical failure.
enum class errkind {
    usage,
    malformed,
    shape_mismatch,
    out_of_range,
    empty_class,
    dimension_mismatch,
    not_positive_definite,
    numeric,
};

class error : public std::runtime_error {
public:
    error(errkind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    errkind kind() const noexcept { return kind_; }

    int exit_class() const noexcept {
        switch (kind_) {
            case errkind::usage: return 1;
            case errkind::malformed:
            case errkind::empty_class: return 2;
            case errkind::shape_mismatch:
            case errkind::out_of_range:
            case errkind::dimension_mismatch: return 3;
            case errkind::not_positive_definite:
            case errkind::numeric: return 4;
        }
        return 4;
    }

private:
    errkind kind_;
};

} // namespace lpool
