#pragma once

#include <string>
#include <variant>
#include <vector>

#include "worldbench/apps/media.hpp"
#include "worldbench/apps/vault.hpp"
#include "worldbench/apps/workbook.hpp"
#include "worldbench/common.hpp"

namespace wb::apps {

using AppState = std::variant<VaultState, WorkbookState, MediaLibraryState>;

struct AppAction {
    std::string app_id;
    std::string verb;
    std::map<std::string, Scalar> params;

    Json to_json() const;
    static AppAction from_json(const Json& j);
};

bool is_known_app(const std::string& app_id);
std::vector<std::string> known_apps();
std::vector<std::string> action_vocabulary(const std::string& app_id);

std::string app_id_of(const AppState& state);
AppState empty_state(const std::string& app_id);

// Pure: returns the successor state, input untouched.
// Throws UnknownVerb / InvalidParams / DomainViolation.
AppState apply_action(const AppState& state, const AppAction& action);

std::vector<std::string> persist_app_state(const AppState& state, const std::string& sandbox_root);
AppState load_app_state(const std::string& app_id, const std::string& sandbox_root);

// sha256 over the canonical state serialization
std::string digest_state(const AppState& state);
Json canonical_state_json(const AppState& state);

// One-paragraph textual observation for agents that want one.
std::string summarize_state(const AppState& state);

}  // namespace wb::apps
