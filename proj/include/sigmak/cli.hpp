#pragma once

// Campaign configuration, execution and report merging behind the sigmak
// command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace sigmak::cli {

inline constexpr int kSchemaVersion = 1;

enum class ExitCode : int { Pass = 0, AssertionFailure = 1, UsageError = 2 };

enum class Command {
    ConesMuPlus,
    VerifyBubble,
    VerifyBarrierSub,
    VerifyBarrierSuper,
    VerifyGershgorin,
    VerifySupH,
    CompareHawking,
    CompareBishopGromov,
    SolveRadial,
    SolveHomotopy
};

/// "cones mu-plus", "verify bubble", ...
[[nodiscard]] std::string to_string(Command c);
/// Throws ConfigError for an unknown command.
[[nodiscard]] Command command_from_string(const std::string& s);
[[nodiscard]] std::vector<Command> all_commands();

using ParamValue = std::variant<bool, double, std::string, std::vector<double>>;

struct Item {
    int n = 0;
    int k = 0;  // 0 when the command has no cone
};

struct Campaign {
    std::string id;
    Command command = Command::ConesMuPlus;
    std::vector<Item> items;
    bool expect_pass = true;
    std::map<std::string, ParamValue> params;

    [[nodiscard]] double number(const std::string& key, double fallback) const;
    [[nodiscard]] int integer(const std::string& key, int fallback) const;
    [[nodiscard]] bool flag(const std::string& key, bool fallback) const;
    [[nodiscard]] std::string text(const std::string& key, const std::string& fallback) const;
    [[nodiscard]] std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
};

struct CampaignConfig {
    int schema_version = kSchemaVersion;
    std::filesystem::path out = "reports";
    std::uint64_t seed = 1;
    int jobs = 1;
    std::vector<Campaign> campaigns;
};

/// Parses and validates a YAML campaign file. Errors are ConfigError with
/// "<source>:<line>:<column>: <field>: <problem>" messages.
[[nodiscard]] CampaignConfig parse_config(const std::string& text, const std::string& source = "<config>");
[[nodiscard]] CampaignConfig load_config(const std::filesystem::path& path);

struct Failure {
    std::string item;
    std::string message;
};

struct CampaignReport {
    std::string id;
    Command command = Command::ConesMuPlus;
    bool expect_pass = true;
    /// Outcome after applying expect_pass.
    bool pass = false;
    int checks = 0;
    std::vector<Failure> failures;
    std::string margin_name;
    double worst_margin = 0.0;  // NaN when the campaign has no margin
    double runtime_seconds = 0.0;
    std::vector<std::string> files;
};

/// Runs one campaign and writes its CSV files into `out` (created if needed).
/// The first CSV line is a "# generated <timestamp>" comment; the rest is a
/// deterministic function of the campaign and the seed.
[[nodiscard]] CampaignReport run_campaign(const Campaign& c, std::uint64_t seed, int jobs,
                                          const std::filesystem::path& out);

[[nodiscard]] nlohmann::json report_to_json(const CampaignReport& r, std::uint64_t seed);

/// Aggregates campaign report documents. Throws ConfigError when a document
/// lacks the schema version or carries a different one.
[[nodiscard]] nlohmann::json merge_reports(std::span<const nlohmann::json> reports);
[[nodiscard]] nlohmann::json merge_report_files(std::span<const std::filesystem::path> files);

/// Full command line entry point. Returns the process exit code.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigmak::cli
