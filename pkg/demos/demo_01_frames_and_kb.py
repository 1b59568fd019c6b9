"""Frames and knowledge bases: parse dialog acts, query records, round-trip.

Run with:  python3 demos/demo_01_frames_and_kb.py
"""

import taskchat as tc

schema = tc.builtin_schema("movie")
print(f"movie schema: {len(schema.intents)} intents, {len(schema.all_slots)} slots,"
      f" primary request slot = {schema.primary_request_slot!r}\n")

# A dialog act is an intent plus inform (slot=value) and request (bare slot) parts.
act = tc.parse_frame("request(moviename;genre=action;date=this weekend)", schema)
print("parsed act:     ", act)
print("  request slots:", act.request_slots)
print("  inform slots: ", dict(act.inform_slots))

# Serialization is canonical under a schema, and parse/serialize round-trips.
canonical = tc.serialize_frame(act, schema)
assert tc.parse_frame(canonical, schema) == act
print("canonical form: ", canonical, "\n")

# Multi-valued constraints use braces; "UNK" marks a requested slot.
multi = tc.parse_frame("inform(theater_chain={amc#regency})")
print("multi-value:    ", dict(multi.inform_slots))
unk = tc.parse_frame("request(genre=action;ticket=UNK)")
print("UNK as request: ", unk, "\n")

# The knowledge base is a JSON array of flat records; queries are constraint maps.
kb = tc.load_kb(tc.resource_text("movie.kb.json"), schema)
print(f"loaded {len(kb)} records")
for constraints in ({"city": "seattle"}, {"moviename": "zootopia"}, {"city": "boston"}):
    hits = [r.id for r in tc.query(kb, constraints)]
    print(f"  query {constraints} -> records {hits}")

print("  starttimes for zootopia:",
      tc.available_values(kb, "starttime", {"moviename": "zootopia"}))
