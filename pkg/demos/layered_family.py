"""Build a small layered family, then compute a vertex profile and a witness graph for it."""

from fo4lab.gset import GSetParams, enumerate_g, verify_g_properties
from fo4lab.profiles import build_witness, format_profile

params = GSetParams(v0_bound=4, bad_bounds=(1,), max_layer=1)
reg = enumerate_g(params)
print("layer sizes:", [len(layer) for layer in reg.layers])
report = verify_g_properties(reg)
print(f"{len(report.rows)} property checks, {len(report.failures)} failures")

member = reg.layers[1][3]
print(f"member: {member.graph.n} vertices, {member.graph.num_edges} edges, root 0")
res = build_witness(member.graph, 0, reg)
print("profile of the root:")
print(format_profile(res.source))
print(f"witness: {res.z.n} vertices, rho_max {res.rho_max}")
print(f"sparse {res.sparse}, same profiles {res.same_profiles}, copies are the bad subgraphs {res.copies_are_bad}")
