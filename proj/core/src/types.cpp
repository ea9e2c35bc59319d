#include "tracestrat/types.hpp"

namespace tracestrat {

std::string_view to_string(Stream s) {
  switch (s) {
    case Stream::navigation: return "navigation";
    case Stream::mouse: return "mouse";
    case Stream::keyboard: return "keyboard";
  }
  throw Error("invalid Stream value");
}

Stream stream_from_string(std::string_view s) {
  if (s == "navigation") return Stream::navigation;
  if (s == "mouse") return Stream::mouse;
  if (s == "keyboard") return Stream::keyboard;
  throw Error("unknown stream: " + std::string(s));
}

const std::array<ProcessLabel, kNumProcesses>& process_alphabet() {
  static const std::array<ProcessLabel, kNumProcesses> alphabet = {
      ProcessLabel::MC_Orientation,  ProcessLabel::MC_Planning,
      ProcessLabel::MC_Monitoring,   ProcessLabel::MC_Evaluation,
      ProcessLabel::LC_FirstReading, ProcessLabel::LC_Rereading,
      ProcessLabel::HC_ElaborationOrganisation,
  };
  return alphabet;
}

std::string_view to_string(ProcessLabel label) {
  switch (label) {
    case ProcessLabel::MC_Orientation: return "MC.Orientation";
    case ProcessLabel::MC_Planning: return "MC.Planning";
    case ProcessLabel::MC_Monitoring: return "MC.Monitoring";
    case ProcessLabel::MC_Evaluation: return "MC.Evaluation";
    case ProcessLabel::LC_FirstReading: return "LC.FirstReading";
    case ProcessLabel::LC_Rereading: return "LC.Rereading";
    case ProcessLabel::HC_ElaborationOrganisation:
      return "HC.ElaborationOrganisation";
    case ProcessLabel::No_Process: return "No_Process";
  }
  throw Error("invalid ProcessLabel value");
}

ProcessLabel process_from_string(std::string_view s) {
  for (ProcessLabel label : process_alphabet()) {
    if (s == to_string(label)) return label;
  }
  if (s == "No_Process") return ProcessLabel::No_Process;
  throw Error("unknown SRL process label: " + std::string(s));
}

std::size_t process_index(ProcessLabel label) {
  const auto& alphabet = process_alphabet();
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    if (alphabet[i] == label) return i;
  }
  throw Error("No_Process has no index in the transition alphabet");
}

}  // namespace tracestrat
