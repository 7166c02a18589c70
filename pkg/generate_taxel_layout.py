import argparse

from tactile.layout import DEFAULT_AZIMUTHS, DEFAULT_ELEVATIONS, DEFAULT_RADIUS, fingertip_grid_layout, save_layout

HEADER = """Reference fingertip layout: {rows} x {cols} grid on the hemispherical cap of a capsule fingertip.
Generated by generate_taxel_layout.py (radius {radius} m).
Row: [x, y, z, roll, pitch, yaw] in {{E}}; m and rad; RPY extrinsic x-y-z (R = Rz Ry Rx).
Taxel z-axis = outward normal; the pad faces +x of {{E}}."""

parser = argparse.ArgumentParser(description="Write the reference taxel layout file")
parser.add_argument('--out', default='configs/layouts/fingertip_30.yaml')
parser.add_argument('--radius', type=float, default=DEFAULT_RADIUS)
parser.add_argument('--elevations', type=float, nargs='+', default=list(DEFAULT_ELEVATIONS))
parser.add_argument('--azimuths', type=float, nargs='+', default=list(DEFAULT_AZIMUTHS))
args = parser.parse_args()

layout = fingertip_grid_layout(args.radius, args.elevations, args.azimuths)
save_layout(args.out, layout, HEADER.format(rows=len(args.elevations), cols=len(args.azimuths), radius=args.radius))
print(f"Saved {layout.n_tx} taxels to {args.out}")
