#pragma once

#include "mss/core/error.hpp"

#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <ostream>
#include <string>

namespace mss::pipeline {

/// Process exit codes shared by every command.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,       ///< bad flags, unreadable or malformed config, nothing to do
    kData = 3,        ///< input data failed validation
    kCheckpoint = 4,  ///< checkpoint corrupt or not matching the request
};

/// Command-line misuse detected after parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const CheckpointMismatch*>(&e) || dynamic_cast<const ModeError*>(&e)) return kCheckpoint;
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InvalidInput*>(&e)) return kUsage;
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const AlignmentMismatch*>(&e) ||
        dynamic_cast<const InvalidDuration*>(&e) || dynamic_cast<const FormatError*>(&e) ||
        dynamic_cast<const NumericalError*>(&e)) {
        return kData;
    }
    return 1;
}

/// Runs a command body, turning library errors into the exit-code contract.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

/// Verbosity from MSSPEC_LOG: quiet|0, info|1 (default), debug|2.
class Log {
public:
    enum Level { quiet = 0, info = 1, debug = 2 };

    explicit Log(std::ostream& out = std::cerr) : out_(out), level_(from_env()) {}
    Log(std::ostream& out, Level level) : out_(out), level_(level) {}

    [[nodiscard]] Level level() const { return level_; }
    void info_line(const std::string& s) const {
        if (level_ >= info) out_ << s << '\n';
    }
    void debug_line(const std::string& s) const {
        if (level_ >= debug) out_ << s << '\n';
    }

    static Level from_env() {
        const char* v = std::getenv("MSSPEC_LOG");
        if (v == nullptr) return info;
        const std::string s(v);
        if (s == "quiet" || s == "0" || s == "error") return quiet;
        if (s == "debug" || s == "2" || s == "trace") return debug;
        return info;
    }

private:
    std::ostream& out_;
    Level level_;
};

}  // namespace mss::pipeline
