import xarray as xr
import cmocean
