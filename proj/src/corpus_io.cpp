#include <fstream>
#include <nlohmann/json.hpp>
#include <unordered_map>

#include "artrec/corpus.hpp"
#include "artrec/error.hpp"

namespace artrec::corpus {
namespace {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr std::string_view kOpen = "<option>";
constexpr std::string_view kClose = "</option>";

bool has_delimiter(std::string_view s) {
    return s.find(kOpen) != std::string_view::npos || s.find(kClose) != std::string_view::npos;
}

// Typed field access that reports the field name and line on failure.
class Reader {
public:
    explicit Reader(std::size_t line) : line_(line) {}

    const json& field(const json& obj, const char* name) const {
        if (!obj.is_object()) fail("expected an object", name);
        auto it = obj.find(name);
        if (it == obj.end()) fail("missing field", name);
        return *it;
    }

    std::string str(const json& obj, const char* name) const {
        const auto& v = field(obj, name);
        if (!v.is_string()) fail("expected a string", name);
        return v.get<std::string>();
    }

    std::int64_t integer(const json& obj, const char* name) const {
        const auto& v = field(obj, name);
        if (!v.is_number_integer()) fail("expected an integer", name);
        return v.get<std::int64_t>();
    }

    const json& array(const json& obj, const char* name) const {
        const auto& v = field(obj, name);
        if (!v.is_array()) fail("expected an array", name);
        return v;
    }

    std::vector<std::string> strings(const json& obj, const char* name) const {
        std::vector<std::string> out;
        for (const auto& v : array(obj, name)) {
            if (!v.is_string()) fail("expected an array of strings", name);
            out.push_back(v.get<std::string>());
        }
        return out;
    }

    [[noreturn]] void fail(const std::string& msg, const std::string& field) const {
        throw ValidationError(msg, line_, field);
    }

private:
    std::size_t line_;
};

}  // namespace

void validate_title(const TitleCard& title) {
    const int m = title.m();
    if (m < 2 || m > 64) throw ValidationError("candidate set size " + std::to_string(m) + " outside [2, 64]", 0, "options");
    for (int j = 0; j < m; ++j) {
        const auto& o = title.options[static_cast<std::size_t>(j)];
        if (o.option_id != j + 1) throw ValidationError("option ids must be consecutive from 1", 0, "id");
        if (o.caption.empty()) throw ValidationError("empty caption", 0, "caption");
        if (has_delimiter(o.caption)) throw ValidationError("caption contains an option delimiter", 0, "caption");
    }
}

void validate_example(const Example& ex) {
    if (!ex.user || !ex.title) throw ValidationError("example without user or title");
    validate_title(*ex.title);
    if (ex.truth_index < 1 || ex.truth_index > ex.m()) throw ValidationError("truth_index out of range", 0, "truth_index");
    const auto& h = ex.user->interactions;
    for (std::size_t i = 1; i < h.size(); ++i)
        if (h[i].timestamp < h[i - 1].timestamp)
            throw ValidationError("history not sorted by timestamp", 0, "history");
}

std::string example_to_json_line(const Example& ex) {
    ojson j;
    j["user_id"] = ex.user->user_id;
    j["title_id"] = ex.title->title_id;
    j["title_name"] = ex.title->name;
    j["genres"] = ex.title->genre_tags;
    auto history = ojson::array();
    for (const auto& it : ex.user->interactions) {
        ojson h;
        h["ts"] = it.timestamp;
        h["title"] = it.title;
        h["genres"] = it.genres;
        h["engagement"] = to_string(it.engagement);
        history.push_back(std::move(h));
    }
    j["history"] = std::move(history);
    auto options = ojson::array();
    for (const auto& o : ex.title->options) {
        ojson oj;
        oj["id"] = o.option_id;
        oj["caption"] = o.caption;
        options.push_back(std::move(oj));
    }
    j["options"] = std::move(options);
    j["truth_index"] = ex.truth_index;
    return j.dump();
}

Example example_from_json_line(const std::string& line, std::size_t line_no) {
    const Reader r(line_no);
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what(), line_no, "");
    }

    auto user = std::make_shared<UserProfile>();
    user->user_id = r.str(j, "user_id");
    for (const auto& h : r.array(j, "history")) {
        Interaction it;
        it.timestamp = r.integer(h, "ts");
        it.title = r.str(h, "title");
        it.genres = r.strings(h, "genres");
        try {
            it.engagement = parse_engagement(r.str(h, "engagement"));
        } catch (const ValidationError& e) {
            r.fail(e.message(), "engagement");
        }
        user->interactions.push_back(std::move(it));
    }

    auto title = std::make_shared<TitleCard>();
    title->title_id = r.str(j, "title_id");
    title->name = r.str(j, "title_name");
    title->genre_tags = r.strings(j, "genres");
    for (const auto& o : r.array(j, "options")) {
        ArtworkOption opt;
        opt.option_id = static_cast<int>(r.integer(o, "id"));
        opt.caption = r.str(o, "caption");
        title->options.push_back(std::move(opt));
    }

    Example ex{std::move(user), std::move(title), static_cast<int>(r.integer(j, "truth_index"))};
    try {
        validate_example(ex);
    } catch (const ValidationError& e) {
        throw ValidationError(e.message(), line_no, e.field());
    }
    return ex;
}

void save_examples(const ExampleSet& set, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& ex : set.examples) {
        validate_example(ex);
        out << example_to_json_line(ex) << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

ExampleSet load_examples(const std::filesystem::path& path, SplitLabel label) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    ExampleSet set;
    set.split_label = label;
    // Share identical users and titles across lines.
    std::unordered_map<std::string, UserPtr> users;
    std::unordered_map<std::string, TitlePtr> titles;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        Example ex = example_from_json_line(line, line_no);
        if (auto it = users.find(ex.user->user_id); it != users.end() && *it->second == *ex.user) {
            ex.user = it->second;
        } else {
            users[ex.user->user_id] = ex.user;
        }
        if (auto it = titles.find(ex.title->title_id); it != titles.end() && *it->second == *ex.title) {
            ex.title = it->second;
        } else {
            titles[ex.title->title_id] = ex.title;
        }
        set.examples.push_back(std::move(ex));
    }
    if (in.bad()) throw Error("read failed: " + path.string());
    return set;
}

Oracle oracle_of(const ExampleSet& set, double preference_noise) {
    Oracle o;
    o.preference_noise = preference_noise;
    for (const auto& ex : set.examples) {
        o.users.emplace(ex.user->user_id, ex.user->latent);
        if (!o.titles.contains(ex.title->title_id)) {
            std::vector<Latent> opts;
            for (const auto& opt : ex.title->options) opts.push_back(opt.latent);
            o.titles.emplace(ex.title->title_id, std::move(opts));
        }
    }
    return o;
}

void save_oracle(const Oracle& oracle, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    ojson header;
    header["kind"] = "header";
    header["preference_noise"] = oracle.preference_noise;
    out << header.dump() << '\n';
    for (const auto& [id, latent] : oracle.users) {
        ojson j;
        j["kind"] = "user";
        j["id"] = id;
        j["latent"] = latent;
        out << j.dump() << '\n';
    }
    for (const auto& [id, options] : oracle.titles) {
        ojson j;
        j["kind"] = "title";
        j["id"] = id;
        j["options"] = options;
        out << j.dump() << '\n';
    }
}

Oracle load_oracle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    Oracle o;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const Reader r(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ValidationError(std::string("malformed JSON: ") + e.what(), line_no, "");
        }
        const auto kind = r.str(j, "kind");
        try {
            if (kind == "header") {
                o.preference_noise = r.field(j, "preference_noise").get<double>();
            } else if (kind == "user") {
                o.users[r.str(j, "id")] = r.field(j, "latent").get<Latent>();
            } else if (kind == "title") {
                o.titles[r.str(j, "id")] = r.field(j, "options").get<std::vector<Latent>>();
            } else {
                r.fail("unknown record kind '" + kind + "'", "kind");
            }
        } catch (const json::type_error& e) {
            r.fail(e.what(), kind);
        }
    }
    return o;
}

ExampleSet attach_oracle(const ExampleSet& set, const Oracle& oracle) {
    ExampleSet out;
    out.split_label = set.split_label;
    std::unordered_map<const UserProfile*, UserPtr> users;
    std::unordered_map<const TitleCard*, TitlePtr> titles;
    for (const auto& ex : set.examples) {
        auto& up = users[ex.user.get()];
        if (!up) {
            auto it = oracle.users.find(ex.user->user_id);
            if (it == oracle.users.end()) throw ValidationError("oracle has no user " + ex.user->user_id);
            auto copy = std::make_shared<UserProfile>(*ex.user);
            copy->latent = it->second;
            up = std::move(copy);
        }
        auto& tp = titles[ex.title.get()];
        if (!tp) {
            auto it = oracle.titles.find(ex.title->title_id);
            if (it == oracle.titles.end() || it->second.size() != ex.title->options.size())
                throw ValidationError("oracle has no matching title " + ex.title->title_id);
            auto copy = std::make_shared<TitleCard>(*ex.title);
            for (std::size_t j = 0; j < copy->options.size(); ++j) copy->options[j].latent = it->second[j];
            tp = std::move(copy);
        }
        out.examples.push_back(Example{up, tp, ex.truth_index});
    }
    return out;
}

}  // namespace artrec::corpus
