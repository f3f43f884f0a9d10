#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace jointdep {

// Minimal streaming JSON writer with deterministic output: keys keep
// insertion order and doubles are rendered with %.17g, so identical inputs
// serialize to identical bytes regardless of platform or thread count.
class JsonWriter {
  public:
    JsonWriter& begin_object() {
        prefix();
        out_ += '{';
        stack_.push_back(State::kObjectFirst);
        return *this;
    }
    JsonWriter& end_object() {
        pop(State::kObjectFirst, State::kObject, '}');
        return *this;
    }
    JsonWriter& begin_array() {
        prefix();
        out_ += '[';
        stack_.push_back(State::kArrayFirst);
        return *this;
    }
    JsonWriter& end_array() {
        pop(State::kArrayFirst, State::kArray, ']');
        return *this;
    }
    JsonWriter& key(const std::string& name) {
        prefix();
        append_string(name);
        out_ += ':';
        pending_value_ = true;
        return *this;
    }
    JsonWriter& value(double v) {
        prefix();
        if (!std::isfinite(v)) throw std::invalid_argument("JsonWriter: non-finite number");
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out_ += buf;
        return *this;
    }
    JsonWriter& value(int v) { return value(static_cast<long long>(v)); }
    JsonWriter& value(long long v) {
        prefix();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(std::uint64_t v) {
        prefix();
        out_ += std::to_string(v);
        return *this;
    }
    JsonWriter& value(bool v) {
        prefix();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonWriter& value(const std::string& v) {
        prefix();
        append_string(v);
        return *this;
    }
    JsonWriter& value(const char* v) { return value(std::string(v)); }

    const std::string& str() const {
        if (!stack_.empty()) throw std::logic_error("JsonWriter: unclosed object or array");
        return out_;
    }

  private:
    enum class State { kObjectFirst, kObject, kArrayFirst, kArray };

    void prefix() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (stack_.empty()) return;
        State& top = stack_.back();
        if (top == State::kObjectFirst) {
            top = State::kObject;
        } else if (top == State::kArrayFirst) {
            top = State::kArray;
        } else {
            out_ += ',';
        }
    }

    void pop(State first, State rest, char closer) {
        if (stack_.empty() || (stack_.back() != first && stack_.back() != rest)) {
            throw std::logic_error("JsonWriter: mismatched close");
        }
        stack_.pop_back();
        out_ += closer;
    }

    void append_string(const std::string& s) {
        out_ += '"';
        for (char ch : s) {
            switch (ch) {
                case '"': out_ += "\\\""; break;
                case '\\': out_ += "\\\\"; break;
                case '\n': out_ += "\\n"; break;
                case '\t': out_ += "\\t"; break;
                case '\r': out_ += "\\r"; break;
                default:
                    if (static_cast<unsigned char>(ch) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                        out_ += buf;
                    } else {
                        out_ += ch;
                    }
            }
        }
        out_ += '"';
    }

    std::string out_;
    std::vector<State> stack_;
    bool pending_value_ = false;
};

}  // namespace jointdep
