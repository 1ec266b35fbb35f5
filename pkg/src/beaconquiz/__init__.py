"""Indoor-positioning quiz demonstrator: virtual BLE room, RSSI pipeline, game."""

__version__ = "0.1.0"
