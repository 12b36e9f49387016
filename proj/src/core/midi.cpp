#include "songsmith/core/midi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

namespace songsmith {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while ((v >>= 7) != 0) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n > 0) out.push_back(buf[--n]);
}

std::int64_t to_ticks(double quarters) {
  return static_cast<std::int64_t>(std::llround(quarters * kTicksPerQuarter));
}

struct Event {
  std::int64_t tick;
  int order;  // at equal ticks: note-off, lyric, note-on
  std::vector<std::uint8_t> bytes;
};

}  // namespace

std::vector<std::uint8_t> melody_to_midi(const MelodySequence& melody, double tempo_bpm,
                                         std::span<const std::string> syllables) {
  if (melody.empty()) throw Error("empty sequence");
  if (!(tempo_bpm > 0)) throw Error("tempo must be positive");
  if (!syllables.empty() && syllables.size() != melody.size()) {
    throw Error("syllable count does not match note count");
  }

  std::vector<Event> events;
  std::int64_t tick = 0;
  double onset = 0.0;
  for (std::size_t i = 0; i < melody.size(); ++i) {
    const auto& n = melody.notes[i];
    if (n.pitch < 0 || n.pitch > 127) throw Error("pitch outside MIDI range");
    tick = to_ticks(onset);
    const std::int64_t off = to_ticks(onset + n.duration);
    if (!syllables.empty()) {
      std::vector<std::uint8_t> lyric = {0xFF, 0x05};
      put_vlq(lyric, static_cast<std::uint32_t>(syllables[i].size()));
      lyric.insert(lyric.end(), syllables[i].begin(), syllables[i].end());
      events.push_back({tick, 1, std::move(lyric)});
    }
    const auto pitch = static_cast<std::uint8_t>(n.pitch);
    events.push_back({tick, 2, {0x90, pitch, 90}});
    events.push_back({off, 0, {0x80, pitch, 0}});
    onset += n.duration + n.rest;
  }
  const std::int64_t end = to_ticks(onset);
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.tick != b.tick ? a.tick < b.tick : a.order < b.order;
  });

  std::vector<std::uint8_t> track;
  const auto usec = static_cast<std::uint32_t>(std::llround(60'000'000.0 / tempo_bpm));
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03, static_cast<std::uint8_t>(usec >> 16),
                             static_cast<std::uint8_t>(usec >> 8), static_cast<std::uint8_t>(usec)});
  track.insert(track.end(), {0x00, 0xFF, 0x58, 0x04, 0x04, 0x02, 0x18, 0x08});
  std::int64_t last = 0;
  for (const auto& e : events) {
    put_vlq(track, static_cast<std::uint32_t>(e.tick - last));
    track.insert(track.end(), e.bytes.begin(), e.bytes.end());
    last = e.tick;
  }
  put_vlq(track, static_cast<std::uint32_t>(end - last));
  track.insert(track.end(), {0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out = {'M', 'T', 'h', 'd'};
  put_u32(out, 6);
  put_u16(out, 0);
  put_u16(out, 1);
  put_u16(out, kTicksPerQuarter);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  put_u32(out, static_cast<std::uint32_t>(track.size()));
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

void export_midi(const MelodySequence& melody, double tempo_bpm, const std::filesystem::path& out,
                 std::span<const std::string> syllables) {
  const auto bytes = melody_to_midi(melody, tempo_bpm, syllables);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write MIDI file " + out.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing MIDI file " + out.string());
}

MidiTrackData parse_midi(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > bytes.size()) throw Error("truncated MIDI file");
  };
  auto u8 = [&]() {
    need(1);
    return bytes[pos++];
  };
  auto u16 = [&]() { return static_cast<std::uint32_t>(u8() << 8 | u8()); };
  auto u32 = [&]() { return u16() << 16 | u16(); };
  auto vlq = [&]() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const auto b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw Error("bad variable-length quantity");
  };
  auto tag = [&](const char* expect) {
    need(4);
    if (!std::equal(expect, expect + 4, bytes.begin() + static_cast<std::ptrdiff_t>(pos))) {
      throw Error(std::string("missing ") + expect + " chunk");
    }
    pos += 4;
  };

  tag("MThd");
  const auto header_len = u32();
  const auto format = u16();
  const auto ntracks = u16();
  const auto division = u16();
  pos += header_len - 6;
  if (division & 0x8000) throw Error("SMPTE time division is not supported");
  if (format > 1) throw Error("MIDI format 2 is not supported");

  MidiTrackData data;
  data.ticks_per_quarter = static_cast<int>(division);
  std::map<int, std::int64_t> open;  // pitch -> onset tick
  for (std::uint32_t t = 0; t < ntracks; ++t) {
    tag("MTrk");
    const std::size_t end = pos + u32();
    std::int64_t tick = 0;
    std::uint8_t status = 0;
    while (pos < end) {
      tick += vlq();
      std::uint8_t b = u8();
      if (b == 0xFF) {
        const auto type = u8();
        const auto len = vlq();
        need(len);
        if (type == 0x51 && len == 3) {
          const std::uint32_t usec = bytes[pos] << 16 | bytes[pos + 1] << 8 | bytes[pos + 2];
          data.tempo_bpm = 60'000'000.0 / usec;
        }
        if (type == 0x2F) data.end_tick = std::max(data.end_tick, tick);
        pos += len;
        continue;
      }
      if (b == 0xF0 || b == 0xF7) {
        pos += vlq();
        continue;
      }
      if (b & 0x80) {
        status = b;
        b = u8();
      } else if (!status) {
        throw Error("running status without a prior status byte");
      }
      const int kind = status & 0xF0;
      const int data1 = b;
      const int data2 = (kind == 0xC0 || kind == 0xD0) ? 0 : u8();
      if (kind == 0x90 && data2 > 0) {
        open[data1] = tick;
      } else if (kind == 0x80 || (kind == 0x90 && data2 == 0)) {
        if (auto it = open.find(data1); it != open.end()) {
          data.notes.push_back({data1, it->second, tick});
          open.erase(it);
        }
      }
    }
    pos = end;
  }
  std::stable_sort(data.notes.begin(), data.notes.end(),
                   [](const MidiNote& a, const MidiNote& b) { return a.on_tick < b.on_tick; });
  for (const auto& n : data.notes) data.end_tick = std::max(data.end_tick, n.off_tick);
  return data;
}

MelodySequence midi_to_melody(std::span<const std::uint8_t> bytes,
                              const std::optional<VocabSet>& vocab) {
  const auto data = parse_midi(bytes);
  MelodySequence m;
  const double tpq = data.ticks_per_quarter;
  for (std::size_t i = 0; i < data.notes.size(); ++i) {
    const auto& n = data.notes[i];
    const std::int64_t next = i + 1 < data.notes.size() ? data.notes[i + 1].on_tick : data.end_tick;
    NoteEvent e{n.pitch, (n.off_tick - n.on_tick) / tpq, std::max<std::int64_t>(0, next - n.off_tick) / tpq};
    if (vocab) {
      e.duration = (*vocab)[Attribute::kDuration].value_at((*vocab)[Attribute::kDuration].nearest_index(e.duration));
      e.rest = (*vocab)[Attribute::kRest].value_at((*vocab)[Attribute::kRest].nearest_index(e.rest));
    }
    m.notes.push_back(e);
  }
  return m;
}

MelodySequence import_midi(const std::filesystem::path& path, const std::optional<VocabSet>& vocab) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read MIDI file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return midi_to_melody(bytes, vocab);
}

}  // namespace songsmith
