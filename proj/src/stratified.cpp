#include "sstlab/stratified.hpp"

#include "sstlab/intertwining.hpp"

namespace sstlab {

const char* dual_event_name(DualEventKind k) {
  switch (k) {
    case DualEventKind::kStart: return "start";
    case DualEventKind::kJump: return "jump";
    case DualEventKind::kExplosion: return "explosion";
  }
  return "?";
}

const char* dual_terminal_name(DualTerminal t) {
  switch (t) {
    case DualTerminal::kAbsorbed: return "Absorbed";
    case DualTerminal::kHorizonReached: return "HorizonReached";
    case DualTerminal::kNoExplosionDetected: return "NoExplosionDetected";
  }
  return "?";
}

const char* case_tag_name(CaseTag t) {
  switch (t) {
    case CaseTag::kDiagonal: return "Diagonal";
    case CaseTag::kPrimalMove: return "PrimalMove";
    case CaseTag::kDualMove: return "DualMove";
    case CaseTag::kJointMove: return "JointMove";
    case CaseTag::kZero: return "Zero";
  }
  return "?";
}

const char* coupled_event_name(CoupledEventKind k) {
  switch (k) {
    case CoupledEventKind::kStart: return "start";
    case CoupledEventKind::kPrimalJump: return "primal";
    case CoupledEventKind::kDualJump: return "dual";
    case CoupledEventKind::kExplosion: return "explosion";
  }
  return "?";
}

}  // namespace sstlab
