#include "intervenidar/bridge/factory.hpp"

#include "intervenidar/bridge/remote.hpp"
#include "intervenidar/bridge/scripted.hpp"

namespace intervenidar::bridge {

std::vector<std::string> builtin_agent_names() {
  return {"random", "stationary", "greedy-painter", "wandering-painter"};
}

AgentPtr make_agent(const std::string& spec, const AgentOptions& options) {
  if (spec.rfind("exec:", 0) == 0) {
    const std::string command = spec.substr(5);
    if (command.empty()) throw UnknownAgentError("agent spec 'exec:' needs a command");
    return std::make_unique<RemoteAgent>(std::make_unique<ChildProcessStream>(command), options.timeout);
  }
  if (spec.rfind("tcp:", 0) == 0) {
    const std::string rest = spec.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0) throw UnknownAgentError("agent spec must be tcp:<host>:<port>");
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      port = -1;
    }
    if (port <= 0 || port > 65535) throw UnknownAgentError("bad port in agent spec '" + spec + "'");
    return std::make_unique<RemoteAgent>(connect_tcp(rest.substr(0, colon), static_cast<std::uint16_t>(port)),
                                         options.timeout);
  }
  const std::string name = spec.rfind("builtin:", 0) == 0 ? spec.substr(8) : spec;
  if (name == "random") return std::make_unique<UniformRandomAgent>();
  if (name == "stationary") return std::make_unique<StationaryAgent>();
  if (name == "greedy-painter") return std::make_unique<GreedyPainterAgent>();
  if (name == "wandering-painter") {
    GreedyPainterOptions o;
    o.wander = 0.5;
    o.id = "wandering-painter";
    return std::make_unique<GreedyPainterAgent>(o);
  }
  throw UnknownAgentError("unknown agent '" + spec + "' (expected builtin:random, builtin:stationary, "
                          "builtin:greedy-painter, builtin:wandering-painter, exec:<command> or tcp:<host>:<port>)");
}

}  // namespace intervenidar::bridge
