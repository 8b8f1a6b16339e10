#pragma once

#include <string>
#include <vector>

#include "intervenidar/bridge/agent.hpp"
#include "intervenidar/bridge/transport.hpp"

namespace intervenidar::bridge {

// The agent spec names no known agent kind. The CLI reports it as a usage
// error.
class UnknownAgentError : public Error {
 public:
  using Error::Error;
};

struct AgentOptions {
  Millis timeout = kDefaultTimeout;
};

// Agent specs:
//   builtin:random            uniform over the five actions
//   builtin:stationary        always no-move
//   builtin:greedy-painter    deterministic painter with enemy avoidance
//   builtin:wandering-painter the painter taking a random survivable move
//                             half of the time (long, human-like sessions)
//   exec:<command>            wire protocol over a child's stdin/stdout
//   tcp:<host>:<port>         wire protocol over TCP
// The "builtin:" prefix may be omitted.
AgentPtr make_agent(const std::string& spec, const AgentOptions& options = {});

std::vector<std::string> builtin_agent_names();

}  // namespace intervenidar::bridge
