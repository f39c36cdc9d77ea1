#include "worldbench/apps/vault.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <sstream>

namespace fs = std::filesystem;

namespace wb::apps {

namespace {

std::vector<std::string> split_path(const std::string& rel) {
    std::vector<std::string> parts;
    std::stringstream ss(rel);
    std::string part;
    while (std::getline(ss, part, '/')) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

bool tag_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '/';
}

}  // namespace

std::set<std::string> extract_tags(const std::string& body) {
    std::set<std::string> tags;
    size_t i = 0;
    while (i < body.size()) {
        if (body[i] == '#' &&
            (i == 0 || std::isspace(static_cast<unsigned char>(body[i - 1])))) {
            size_t j = i + 1;
            while (j < body.size() && tag_char(body[j])) ++j;
            if (j > i + 1) tags.insert(body.substr(i + 1, j - i - 1));
            i = j;
        } else {
            ++i;
        }
    }
    return tags;
}

std::set<std::string> extract_links(const std::string& body) {
    std::set<std::string> links;
    size_t i = 0;
    while ((i = body.find("[[", i)) != std::string::npos) {
        size_t end = body.find("]]", i + 2);
        if (end == std::string::npos) break;
        std::string target = body.substr(i + 2, end - i - 2);
        if (!target.empty()) links.insert(target);
        i = end + 2;
    }
    return links;
}

void Note::recompute_derived() {
    tags = extract_tags(body);
    links = extract_links(body);
}

std::string render_note(const Note& note) {
    std::string out;
    if (!note.frontmatter.empty()) {
        out += "---\n";
        for (const auto& [k, v] : note.frontmatter) out += k + ": " + v + "\n";
        out += "---\n";
    }
    out += note.body;
    return out;
}

Note parse_note(const std::string& content) {
    Note note;
    std::string rest = content;
    if (content.rfind("---\n", 0) == 0 || content == "---") {
        size_t line_start = 4;
        std::map<std::string, std::string> fm;
        bool closed = false;
        while (line_start <= content.size()) {
            size_t eol = content.find('\n', line_start);
            std::string line = content.substr(
                line_start, eol == std::string::npos ? std::string::npos : eol - line_start);
            if (line == "---") {
                closed = true;
                rest = eol == std::string::npos ? "" : content.substr(eol + 1);
                break;
            }
            size_t colon = line.find(": ");
            if (colon == std::string::npos) {
                closed = false;
                break;
            }
            std::string key = line.substr(0, colon);
            if (fm.count(key)) throw Error("MalformedState", "duplicate frontmatter key: " + key);
            fm[key] = line.substr(colon + 2);
            if (eol == std::string::npos) break;
            line_start = eol + 1;
        }
        if (closed) note.frontmatter = std::move(fm);
    }
    note.body = note.frontmatter.empty() && rest == content ? content : rest;
    note.recompute_derived();
    return note;
}

namespace {

Json folder_to_json(const VaultFolder& f) {
    Json notes = Json::object();
    for (const auto& [name, note] : f.notes) {
        Json fm = Json::object();
        for (const auto& [k, v] : note.frontmatter) fm[k] = v;
        notes[name] = Json{{"body", note.body},
                           {"frontmatter", fm},
                           {"tags", std::vector<std::string>(note.tags.begin(), note.tags.end())},
                           {"links", std::vector<std::string>(note.links.begin(), note.links.end())}};
    }
    Json folders = Json::object();
    for (const auto& [name, sub] : f.folders) folders[name] = folder_to_json(sub);
    return Json{{"folders", folders}, {"notes", notes}};
}

void count_rec(const VaultFolder& f, int& notes, int& folders) {
    notes += static_cast<int>(f.notes.size());
    for (const auto& [_, sub] : f.folders) {
        ++folders;
        count_rec(sub, notes, folders);
    }
}

}  // namespace

Json VaultState::to_canonical_json() const {
    return Json{{"app", "vault"}, {"root", folder_to_json(root)}};
}

int VaultState::note_count() const {
    int n = 0, f = 0;
    count_rec(root, n, f);
    return n;
}

int VaultState::folder_count() const {
    int n = 0, f = 0;
    count_rec(root, n, f);
    return f;
}

const Note* VaultState::find_note(const std::string& rel_path) const {
    auto parts = split_path(rel_path);
    if (parts.empty()) return nullptr;
    const VaultFolder* cur = &root;
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
        auto it = cur->folders.find(parts[i]);
        if (it == cur->folders.end()) return nullptr;
        cur = &it->second;
    }
    auto it = cur->notes.find(parts.back());
    return it == cur->notes.end() ? nullptr : &it->second;
}

bool VaultState::folder_exists(const std::string& rel_path) const {
    auto parts = split_path(rel_path);
    const VaultFolder* cur = &root;
    for (const auto& part : parts) {
        auto it = cur->folders.find(part);
        if (it == cur->folders.end()) return false;
        cur = &it->second;
    }
    return !parts.empty();
}

namespace {

void persist_folder(const VaultFolder& f, const fs::path& dir, const fs::path& rel,
                    std::vector<std::string>* written) {
    fs::create_directories(dir);
    for (const auto& [name, note] : f.notes) {
        write_file((dir / name).string(), render_note(note));
        if (written) written->push_back((rel / name).generic_string());
    }
    for (const auto& [name, sub] : f.folders) persist_folder(sub, dir / name, rel / name, written);
}

VaultFolder load_folder(const fs::path& dir) {
    VaultFolder f;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::string name = entry.path().filename().string();
        if (entry.is_directory()) {
            f.folders[name] = load_folder(entry.path());
        } else if (entry.is_regular_file() && name != ".vault") {
            try {
                f.notes[name] = parse_note(read_file(entry.path().string()));
            } catch (const Error& e) {
                throw Error("MalformedState", entry.path().string() + ": " + e.what());
            }
        }
    }
    return f;
}

}  // namespace

void persist_vault(const VaultState& s, const std::string& sandbox_root,
                   std::vector<std::string>* written) {
    fs::path root = fs::path(sandbox_root) / kVaultRoot;
    // suppress stale files from a previous persist
    if (fs::exists(root)) fs::remove_all(root);
    fs::create_directories(root);
    write_file((root / ".vault").string(), "");
    if (written) written->push_back(std::string(kVaultRoot) + "/.vault");
    persist_folder(s.root, root, fs::path(kVaultRoot), written);
}

VaultState load_vault_dir(const std::string& vault_dir) {
    fs::path root(vault_dir);
    if (!fs::exists(root) || !fs::is_directory(root)) {
        throw Error("MissingState", "vault root not found at " + root.string());
    }
    VaultState s;
    s.root = load_folder(root);
    return s;
}

VaultState load_vault(const std::string& sandbox_root) {
    return load_vault_dir((fs::path(sandbox_root) / kVaultRoot).string());
}

}  // namespace wb::apps
