#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace wb {

using Json = nlohmann::json;

// Domain error with a machine-readable kind ("SchemaViolation",
// "MissingTable", "UnknownVerb", ...). Verdict-producing layers catch these
// and turn them into ok=false records; everything else lets them propagate.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

// Scalar value as it appears in cells, action params and expect operands.
using Scalar = std::variant<double, std::string, bool>;

Json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const Json& j);
std::string scalar_to_string(const Scalar& s);

// Canonical decimal rendering, 12 significant digits. All number
// comparisons that feed digests or verdicts go through this.
std::string format_number(double v);
bool numbers_equal(double a, double b);

// Deterministic 64-bit generator (splitmix64). std::mt19937 would do, but
// keeping the draw logic in one place avoids distribution portability traps.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next();
    // uniform in [0, n)
    uint64_t below(uint64_t n);
    // uniform in [lo, hi] inclusive
    int64_t range(int64_t lo, int64_t hi);
    double unit();

private:
    uint64_t state_;
};

std::string sha256_hex(const std::string& bytes);

// Content digest of an on-disk tree: sorted rel paths + file bytes.
std::string digest_directory(const std::string& root);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

// Rejects absolute paths and parent traversal; returns sandbox_root/rel.
std::string safe_join(const std::string& sandbox_root, const std::string& rel);
bool is_safe_rel_path(const std::string& rel);

std::string b64_encode(const std::string& bytes);
std::string b64_decode(const std::string& text);

}  // namespace wb
