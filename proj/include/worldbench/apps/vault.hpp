#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "worldbench/common.hpp"

namespace wb::apps {

// Note body with derived tag/link sets. Tags are whitespace-delimited
// `#token` occurrences in the body; links are `[[Target]]` occurrences.
// Both are recomputed from the body on every mutation, never stored.
struct Note {
    std::string body;
    std::map<std::string, std::string> frontmatter;
    std::set<std::string> tags;
    std::set<std::string> links;

    void recompute_derived();
};

struct VaultFolder {
    std::map<std::string, VaultFolder> folders;
    std::map<std::string, Note> notes;
};

struct VaultState {
    VaultFolder root;

    Json to_canonical_json() const;
    int note_count() const;
    int folder_count() const;

    const Note* find_note(const std::string& rel_path) const;
    bool folder_exists(const std::string& rel_path) const;
};

std::set<std::string> extract_tags(const std::string& body);
std::set<std::string> extract_links(const std::string& body);

// Serializes frontmatter + body to the on-disk `.md` layout and back.
std::string render_note(const Note& note);
Note parse_note(const std::string& content);

// Rel dir the vault persists under inside a sandbox.
inline constexpr const char* kVaultRoot = "vault";

void persist_vault(const VaultState& s, const std::string& sandbox_root,
                   std::vector<std::string>* written);
VaultState load_vault(const std::string& sandbox_root);
// Loads a vault whose root is `vault_dir` itself (verifier-side path binding).
VaultState load_vault_dir(const std::string& vault_dir);

}  // namespace wb::apps
