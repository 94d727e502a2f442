#pragma once

#include <deque>
#include <string>
#include <vector>

#include "lrs/errors.hpp"
#include "lrs/field.hpp"

namespace lrs {

enum class Direction { l_to_r, r_to_l };

inline const char* to_string(Direction d) {
  return d == Direction::l_to_r ? "LtoR" : "RtoL";
}

struct ChannelMessage {
  Direction dir;
  FieldVector payload;

  friend bool operator==(const ChannelMessage&, const ChannelMessage&) = default;
};

// In-process duplex channel. FIFO per direction; every message is recorded in
// the transcript exactly once, at send time.
class Channel {
 public:
  void send_to_r(FieldVector v) {
    transcript_.push_back({Direction::l_to_r, v});
    to_r_.push_back(std::move(v));
  }

  void send_to_l(FieldVector v) {
    transcript_.push_back({Direction::r_to_l, v});
    to_l_.push_back(std::move(v));
  }

  FieldVector recv_at_r() { return pop(to_r_, "P_R"); }
  FieldVector recv_at_l() { return pop(to_l_, "P_L"); }

  const std::vector<ChannelMessage>& transcript() const { return transcript_; }
  std::size_t messages_sent() const { return transcript_.size(); }
  bool idle() const { return to_r_.empty() && to_l_.empty(); }

  void clear() {
    transcript_.clear();
    to_r_.clear();
    to_l_.clear();
  }

 private:
  static FieldVector pop(std::deque<FieldVector>& q, const char* who) {
    if (q.empty()) throw Error(std::string("channel receive at ") + who + " with no pending message");
    FieldVector v = std::move(q.front());
    q.pop_front();
    return v;
  }

  std::vector<ChannelMessage> transcript_;
  std::deque<FieldVector> to_r_;
  std::deque<FieldVector> to_l_;
};

}  // namespace lrs
