#pragma once

#include "esn/errors.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>

namespace esn::detail {

using nlohmann::json;

/// Rejects keys of `object` outside `allowed`; typos in config files must fail.
template <typename Error = ConfigError>
void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& context)
{
    if (!object.is_object()) {
        throw Error(context + ": expected a JSON object");
    }
    for (const auto& [key, value] : object.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error(context + ": unknown key '" + key + "'");
        }
    }
}

template <typename T, typename Error = ConfigError>
T required(const json& object, const char* key, const std::string& context)
{
    if (!object.contains(key)) {
        throw Error(context + ": missing key '" + key + "'");
    }
    try {
        return object.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(context + ": key '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

template <typename T, typename Error = ConfigError>
void optional(const json& object, const char* key, const std::string& context, T& target)
{
    if (object.contains(key)) {
        target = required<T, Error>(object, key, context);
    }
}

} // namespace esn::detail
