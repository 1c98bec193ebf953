#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include <json.hpp>

namespace cbcast::kvs {

using Json = nlohmann::json;

/// A replicated store mutation, carried as the raw payload of a broadcast
/// message. Wire form: {"op":"put","key":k,"value":v} or
/// {"op":"del","key":k}.
struct KvCommand {
  enum class Kind : std::uint8_t { Put, Del };

  Kind kind = Kind::Put;
  std::string key;
  Json value;  // null for deletes

  static KvCommand put(std::string key, Json value) {
    require_key(key);
    return KvCommand{Kind::Put, std::move(key), std::move(value)};
  }

  static KvCommand del(std::string key) {
    require_key(key);
    return KvCommand{Kind::Del, std::move(key), Json()};
  }

  Json to_json() const {
    if (kind == Kind::Put) {
      return Json{{"op", "put"}, {"key", key}, {"value", value}};
    }
    return Json{{"op", "del"}, {"key", key}};
  }

  static KvCommand from_json(const Json& j) {
    if (!j.is_object() || !j.contains("op") || !j.contains("key") ||
        !j.at("op").is_string() || !j.at("key").is_string()) {
      throw std::invalid_argument("malformed kv command");
    }
    const std::string op = j.at("op").get<std::string>();
    if (op == "put") {
      if (!j.contains("value")) {
        throw std::invalid_argument("put command needs a value");
      }
      return put(j.at("key").get<std::string>(), j.at("value"));
    }
    if (op == "del") {
      return del(j.at("key").get<std::string>());
    }
    throw std::invalid_argument("unknown kv command op: " + op);
  }

 private:
  static void require_key(const std::string& key) {
    if (key.empty()) throw std::invalid_argument("kv key must be non-empty");
  }
};

}  // namespace cbcast::kvs
