#include "esn/dataset.hpp"
#include "esn/errors.hpp"

#include <cmath>

namespace esn {

bool Ratings::valid() const
{
    for (double r : {valence, arousal, dominance, liking}) {
        if (!(r >= 1.0 && r <= 9.0)) {
            return false;
        }
    }
    return true;
}

void LabelScheme::validate() const
{
    if (!(threshold > 1.0 && threshold < 9.0)) {
        throw ConfigError("label threshold must lie in (1, 9)");
    }
}

std::vector<std::string> LabelScheme::class_names() const
{
    switch (kind) {
    case SchemeKind::LAHA:
        return {"LowArousal", "HighArousal"};
    case SchemeKind::LVHV:
        return {"LowValence", "HighValence"};
    case SchemeKind::StressCalm:
        return {"Stress", "Calm"};
    case SchemeKind::EightStates:
        return {"Protected", "Satisfied", "Surprised", "Happy",
                "Sad",       "Unconcerned", "Frightened", "Angry"};
    }
    return {};
}

std::string to_string(SchemeKind kind)
{
    switch (kind) {
    case SchemeKind::LAHA:
        return "LAHA";
    case SchemeKind::LVHV:
        return "LVHV";
    case SchemeKind::StressCalm:
        return "StressCalm";
    case SchemeKind::EightStates:
        return "EightStates";
    }
    return "LAHA";
}

SchemeKind scheme_from_string(const std::string& name)
{
    for (SchemeKind k : {SchemeKind::LAHA, SchemeKind::LVHV, SchemeKind::StressCalm,
                         SchemeKind::EightStates}) {
        if (to_string(k) == name) {
            return k;
        }
    }
    throw ConfigError("unknown label scheme '" + name
                      + "' (expected LAHA, LVHV, StressCalm or EightStates)");
}

std::optional<int> label_trial(const Ratings& r, const LabelScheme& scheme)
{
    const bool high_valence = r.valence >= scheme.threshold;
    const bool high_arousal = r.arousal >= scheme.threshold;
    const bool high_dominance = r.dominance >= scheme.threshold;
    switch (scheme.kind) {
    case SchemeKind::LAHA:
        return high_arousal ? 1 : 0;
    case SchemeKind::LVHV:
        return high_valence ? 1 : 0;
    case SchemeKind::StressCalm:
        if (r.valence <= 3.0 && r.arousal >= 5.0) {
            return 0;
        }
        if (r.valence >= 4.0 && r.valence <= 6.0 && r.arousal < 4.0) {
            return 1;
        }
        return std::nullopt;
    case SchemeKind::EightStates:
        return 4 * (high_valence ? 0 : 1) + 2 * (high_arousal ? 1 : 0) + (high_dominance ? 1 : 0);
    }
    return std::nullopt;
}

} // namespace esn
