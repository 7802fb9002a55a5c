#include "artrec/lexicon.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace artrec::lexicon {
namespace {

using Words = std::span<const std::string_view>;

constexpr std::array<std::string_view, kMaxThemes> kThemeNames = {
    "action", "romance", "comedy", "horror", "family", "mystery",
    "scifi", "drama", "fantasy", "documentary", "western", "musical",
};

constexpr std::string_view kAction[] = {
    "explosive", "gunfire", "chase", "fistfight", "helicopter", "blast", "combat",
    "adrenaline", "stuntman", "rooftop", "motorcycle", "shrapnel", "armored", "pursuit",
    "sniper", "wreckage", "ambush", "muscular", "fiery", "showdown",
};
constexpr std::string_view kRomance[] = {
    "embrace", "tender", "kiss", "lovers", "sunset", "heartfelt", "longing",
    "candlelit", "whispered", "wedding", "gazing", "intimate", "blossoming", "roses",
    "affection", "yearning", "couple", "devoted", "warmth", "serenade",
};
constexpr std::string_view kComedy[] = {
    "slapstick", "grinning", "goofy", "prank", "laughing", "quirky", "zany",
    "awkward", "mischievous", "cartoonish", "banana", "giggling", "silly", "wacky",
    "pratfall", "cheeky", "hilarious", "clownish", "comedic", "playful",
};
constexpr std::string_view kHorror[] = {
    "blood", "shadowy", "creepy", "haunted", "skull", "scream", "ghostly",
    "sinister", "decaying", "crypt", "eerie", "monstrous", "fog", "corpse",
    "dread", "claws", "possessed", "macabre", "grave", "terrified",
};
constexpr std::string_view kFamily[] = {
    "children", "puppy", "picnic", "grandparents", "cheerful", "siblings", "backyard",
    "bedtime", "balloons", "wholesome", "cozy", "parents", "hugging", "kitten",
    "playground", "birthday", "gentle", "holiday", "treehouse", "reunion",
};
constexpr std::string_view kMystery[] = {
    "detective", "clue", "magnifying", "suspect", "alibi", "cipher", "footprints",
    "interrogation", "secretive", "noir", "trenchcoat", "evidence", "puzzling", "hidden",
    "lantern", "investigator", "riddle", "locked", "witness", "enigmatic",
};
constexpr std::string_view kScifi[] = {
    "spaceship", "robot", "galaxy", "laser", "android", "futuristic", "hologram",
    "alien", "cybernetic", "starfield", "neon", "orbital", "quantum", "spacesuit",
    "planetary", "circuitry", "teleport", "mech", "asteroid", "synthetic",
};
constexpr std::string_view kDrama[] = {
    "tearful", "solemn", "brooding", "grief", "courtroom", "somber", "conflicted",
    "sorrowful", "dignified", "confrontation", "hospital", "regret", "weary", "anguish",
    "reflective", "stoic", "burdened", "raw", "melancholy", "resolute",
};
constexpr std::string_view kFantasy[] = {
    "dragon", "wizard", "enchanted", "castle", "sorcery", "elven", "mythical",
    "spellbook", "kingdom", "unicorn", "runes", "fairy", "magical", "quest",
    "amulet", "goblin", "throne", "prophecy", "mystical", "griffin",
};
constexpr std::string_view kDocumentary[] = {
    "archival", "interview", "factual", "footage", "expert", "wildlife", "historical",
    "chronicle", "candid", "journalist", "testimony", "landscape", "scientific", "observational",
    "real", "narrator", "timeline", "survey", "authentic", "investigative",
};
constexpr std::string_view kWestern[] = {
    "cowboy", "saloon", "desert", "revolver", "horseback", "frontier", "dusty",
    "sheriff", "cattle", "canyon", "outlaw", "stagecoach", "lasso", "prairie",
    "spurs", "ranch", "tumbleweed", "bandit", "duel", "rugged",
};
constexpr std::string_view kMusical[] = {
    "singing", "dancers", "stage", "microphone", "chorus", "spotlight", "tap",
    "orchestra", "melody", "ballroom", "rhythm", "sequins", "piano", "broadway",
    "concert", "harmony", "choreography", "tune", "jazzy", "duet",
};

constexpr std::array<Words, kMaxThemes> kThemeWords = {
    Words(kAction), Words(kRomance), Words(kComedy), Words(kHorror),
    Words(kFamily), Words(kMystery), Words(kScifi), Words(kDrama),
    Words(kFantasy), Words(kDocumentary), Words(kWestern), Words(kMusical),
};

constexpr std::string_view kFiller[] = {
    "bright", "dark", "wide", "close", "soft", "sharp", "muted", "vivid",
    "warm", "cool", "textured", "layered", "grainy", "polished", "painted", "photographic",
    "central", "distant", "framed", "balanced", "tilted", "crowded", "empty", "open",
    "blue", "red", "golden", "silver", "green", "amber", "violet", "pale",
};

constexpr std::string_view kTitleAdjectives[] = {
    "Silent", "Broken", "Golden", "Last", "Hidden", "Crimson", "Endless", "Northern",
    "Lost", "Burning", "Quiet", "Wild", "Distant", "Hollow", "Bright", "Frozen",
    "Midnight", "Electric", "Velvet", "Iron",
};

constexpr std::string_view kTitleNouns[] = {
    "Harbor", "Kingdom", "Signal", "Promise", "Frontier", "Garden", "Echo", "Empire",
    "Station", "Orchard", "Voyage", "Covenant", "Tide", "Mirror", "Lighthouse", "Parade",
    "Circuit", "Canyon", "Letters", "Summer",
};

const std::unordered_map<std::string, int>& token_index() {
    static const std::unordered_map<std::string, int> index = [] {
        std::unordered_map<std::string, int> out;
        for (int g = 0; g < kMaxThemes; ++g) {
            out.emplace(std::string(kThemeNames[g]), g);
            for (auto w : kThemeWords[g]) out.emplace(std::string(w), g);
        }
        return out;
    }();
    return index;
}

}  // namespace

std::string_view theme_name(int g) {
    if (g < 0 || g >= kMaxThemes) throw std::out_of_range("theme index");
    return kThemeNames[g];
}

std::span<const std::string_view> theme_words(int g) {
    if (g < 0 || g >= kMaxThemes) throw std::out_of_range("theme index");
    return kThemeWords[g];
}

std::optional<int> theme_of_token(std::string_view token) {
    const auto& index = token_index();
    auto it = index.find(std::string(token));
    if (it == index.end()) return std::nullopt;
    return it->second;
}

std::span<const std::string_view> filler_words() { return kFiller; }
std::span<const std::string_view> title_adjectives() { return kTitleAdjectives; }
std::span<const std::string_view> title_nouns() { return kTitleNouns; }

}  // namespace artrec::lexicon
